"""Byte-stream transports carrying protocol lines between orchestrator and agents."""

from __future__ import annotations

import logging
import socket
from typing import Callable, Protocol

from .protocol import Kind, decode

log = logging.getLogger(__name__)


class TransportError(ConnectionError):
    pass


class AgentUnresponsive(TimeoutError):
    pass


class Connection(Protocol):
    def request(self, line: str, expect_reply: bool) -> str | None: ...

    def close(self) -> None: ...


class LocalConnection:
    """In-process channel: hands each line to ``handler`` and returns its reply line."""

    def __init__(self, handler: Callable[[str], str | None]) -> None:
        self.handler = handler

    def request(self, line: str, expect_reply: bool) -> str | None:
        reply = self.handler(line)
        return reply if expect_reply else None

    def close(self) -> None:
        pass


class SocketConnection:
    """One agent on a TCP stream; strictly one outstanding request at a time."""

    def __init__(self, sock: socket.socket, timeout: float | None = None) -> None:
        self.sock = sock
        self.sock.settimeout(timeout)
        self.dead = False
        self._rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        self._wfile = sock.makefile("w", encoding="utf-8", newline="\n")

    def request(self, line: str, expect_reply: bool) -> str | None:
        if self.dead:
            raise AgentUnresponsive("agent timed out earlier in this match")
        try:
            self._wfile.write(line + "\n")
            self._wfile.flush()
            if not expect_reply:
                return None
            reply = self._rfile.readline()
        except socket.timeout as exc:
            # The stream is out of sync after a timeout; a late reply would be misread.
            self.dead = True
            self.close()
            raise AgentUnresponsive("agent did not reply in time") from exc
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        if not reply:
            raise TransportError("agent closed the connection")
        return reply.rstrip("\n")

    def close(self) -> None:
        for f in (self._rfile, self._wfile):
            try:
                f.close()
            except OSError:
                pass
        try:
            self.sock.close()
        except OSError:
            pass


def accept_agents(server: socket.socket, count: int = 5, timeout: float | None = None) -> list[SocketConnection]:
    """Accept ``count`` agent connections in arrival order."""
    conns = []
    while len(conns) < count:
        sock, addr = server.accept()
        log.info("agent connected from %s", addr)
        conns.append(SocketConnection(sock, timeout))
    return conns


def run_client(host: str, port: int, make_handler: Callable[[int], Callable[[str], str | None]]) -> None:
    """Connect to an orchestrator and serve one match.

    ``make_handler(agent_id)`` is called on INITIALIZE and must return a
    function mapping request lines to reply lines.
    """
    with socket.create_connection((host, port)) as sock:
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        wfile = sock.makefile("w", encoding="utf-8", newline="\n")
        handler = None
        for line in rfile:
            message = decode(line.rstrip("\n"))
            if handler is None:
                handler = make_handler(message.view.viewer)
            reply = handler(line.rstrip("\n"))
            if message.response_expected and reply is not None:
                wfile.write(reply + "\n")
                wfile.flush()
            if message.kind is Kind.FINISH:
                break
