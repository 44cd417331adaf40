import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wolfdial import core
from wolfdial.core import (
    AGENT_IDS,
    GameError,
    GameFinished,
    InvalidTarget,
    InvalidVote,
    MissingVote,
    NotAlive,
    Phase,
    Role,
    SeerDead,
    Species,
    Status,
    TalkEntry,
    Team,
    VoteRecord,
)

ALL_ASSIGNMENTS = sorted(set(itertools.permutations(core.ROLE_MULTISET)))
ALL_SUBSETS = [frozenset(a for a, bit in zip(AGENT_IDS, bits) if bit) for bits in itertools.product((0, 1), repeat=5)]


def win_oracle(roles: dict, alive: frozenset) -> Status:
    """Straight transcription of the two win rules, independent of check_win."""
    wolves = [a for a in alive if roles[a] == Role.WEREWOLF]
    humans = [a for a in alive if roles[a] in (Role.VILLAGER, Role.SEER, Role.POSSESSED)]
    if not wolves:
        return Status.HUMAN_WIN
    if len(humans) <= len(wolves):
        return Status.WEREWOLF_WIN
    return Status.ONGOING


def plurality_oracle(targets: list[int]) -> set[int]:
    table = {}
    for t in targets:
        table[t] = table.get(t, 0) + 1
    best = max(table.values())
    return {t for t, n in table.items() if n == best}


def roles_of(assignment) -> dict[int, Role]:
    return dict(zip(AGENT_IDS, assignment))


def fresh(seed=0, roles=None):
    return core.new_game(roles or roles_of(ALL_ASSIGNMENTS[0]), seed)


# -- roles --------------------------------------------------------------------


def test_role_teams_and_species():
    assert {r for r in Role if r.team is Team.WEREWOLF} == {Role.WEREWOLF, Role.POSSESSED}
    assert {r for r in Role if r.species is Species.WEREWOLF} == {Role.WEREWOLF}
    assert Role.POSSESSED.species is Species.HUMAN


def test_assign_roles_is_deterministic_and_uses_the_multiset():
    for seed in range(50):
        a = core.assign_roles(random.Random(seed))
        assert a == core.assign_roles(random.Random(seed))
        assert Counter(a.values()) == Counter(
            {Role.SEER: 1, Role.WEREWOLF: 1, Role.POSSESSED: 1, Role.VILLAGER: 2}
        )


def test_werewolf_position_is_uniform_over_10k_seeds():
    hits = Counter()
    n = 10_000
    for seed in range(n):
        roles = core.assign_roles(random.Random(seed))
        hits[next(a for a, r in roles.items() if r is Role.WEREWOLF)] += 1
    for agent in AGENT_IDS:
        assert abs(hits[agent] / n - 0.2) <= 0.02


def test_distinct_assignment_count():
    # 5! / 2! permutations of the multiset
    assert len(ALL_ASSIGNMENTS) == 60


def test_new_game_rejects_bad_multiset():
    with pytest.raises(ValueError):
        core.new_game({a: Role.VILLAGER for a in AGENT_IDS})
    with pytest.raises(ValueError):
        core.new_game({1: Role.SEER})


# -- win logic ---------------------------------------------------------------------


def test_check_win_matches_oracle_exhaustively():
    cases = 0
    for assignment in ALL_ASSIGNMENTS:
        roles = roles_of(assignment)
        base = fresh(roles=roles)
        for alive in ALL_SUBSETS:
            state = core.GameState(**{**base.__dict__, "alive": alive})
            assert core.check_win(state) is win_oracle(roles, alive), (assignment, sorted(alive))
            cases += 1
    assert cases == 60 * 32


def test_initial_state_is_ongoing():
    assert core.check_win(fresh()) is Status.ONGOING


def test_werewolf_executed_on_day_one_is_human_win():
    state = fresh()
    state = core.next_day(core.start_night(state))
    state = core.start_vote(state)
    wolf = state.werewolf
    votes = [VoteRecord(1, a, wolf if a != wolf else next(b for b in AGENT_IDS if b != wolf)) for a in AGENT_IDS]
    assert core.tally_votes(votes, state.alive, random.Random(0)) == wolf
    state = core.resolve_elimination(core.record_votes(state, votes), wolf)
    assert state.status is Status.HUMAN_WIN
    with pytest.raises(GameFinished):
        core.add_talk(state, TalkEntry(1, 0, 0, 1, "hello"))


# -- tally -----------------------------------------------------------------------------


def all_vote_vectors():
    choices = [[t for t in AGENT_IDS if t != v] for v in AGENT_IDS]
    return list(itertools.product(*choices))


def test_tally_matches_plurality_oracle_on_all_1024_vectors():
    vectors = all_vote_vectors()
    assert len(vectors) == 1024
    alive = frozenset(AGENT_IDS)
    for i, vec in enumerate(vectors):
        votes = [VoteRecord(1, v, t) for v, t in zip(AGENT_IDS, vec)]
        winners = plurality_oracle(list(vec))
        got = core.tally_votes(votes, alive, random.Random(i))
        assert got in winners
        if len(winners) == 1:
            assert got == next(iter(winners))


def test_tally_unique_plurality_example():
    votes = [VoteRecord(1, 1, 2), VoteRecord(1, 3, 2), VoteRecord(1, 4, 2), VoteRecord(1, 5, 2), VoteRecord(1, 2, 1)]
    assert core.tally_votes(votes, AGENT_IDS, random.Random(0)) == 2


def test_tally_rejects_self_vote():
    votes = [VoteRecord(1, 1, 2), VoteRecord(1, 2, 1), VoteRecord(1, 3, 2), VoteRecord(1, 4, 1), VoteRecord(1, 5, 5)]
    with pytest.raises(InvalidVote):
        core.tally_votes(votes, AGENT_IDS, random.Random(0))


def test_tally_rejects_missing_and_dead_votes():
    with pytest.raises(MissingVote):
        core.tally_votes([VoteRecord(1, 1, 2)], AGENT_IDS, random.Random(0))
    with pytest.raises(InvalidVote):
        core.tally_votes([VoteRecord(1, 1, 2), VoteRecord(1, 2, 5)], {1, 2}, random.Random(0))
    with pytest.raises(InvalidVote):
        core.tally_votes([VoteRecord(1, 1, 2), VoteRecord(1, 2, 1), VoteRecord(1, 3, 1)], {1, 2}, random.Random(0))


def test_tie_break_is_roughly_uniform():
    votes = [VoteRecord(1, 1, 2), VoteRecord(1, 2, 1), VoteRecord(1, 3, 4), VoteRecord(1, 4, 3), VoteRecord(1, 5, 1)]
    # 1 has two votes, everyone else at most one: no tie
    assert core.tally_votes(votes, AGENT_IDS, random.Random(0)) == 1
    tied = [VoteRecord(1, 1, 2), VoteRecord(1, 2, 1), VoteRecord(1, 3, 2), VoteRecord(1, 4, 1), VoteRecord(1, 5, 3)]
    picks = Counter(core.tally_votes(tied, AGENT_IDS, random.Random(s)) for s in range(4000))
    assert set(picks) == {1, 2}
    assert abs(picks[1] / 4000 - 0.5) < 0.04


@given(st.tuples(*[st.sampled_from([t for t in AGENT_IDS if t != v]) for v in AGENT_IDS]), st.integers(0, 2**32))
def test_tally_is_deterministic_given_seed(vec, seed):
    votes = [VoteRecord(1, v, t) for v, t in zip(AGENT_IDS, vec)]
    a = core.tally_votes(votes, AGENT_IDS, random.Random(seed))
    assert a == core.tally_votes(votes, AGENT_IDS, random.Random(seed))
    assert a in plurality_oracle(list(vec))


# -- attack and divination ---------------------------------------------------------------


def test_divine_results_against_role_table():
    for assignment in ALL_ASSIGNMENTS:
        roles = roles_of(assignment)
        state = fresh(roles=roles)
        results = []
        for target in core.divine_candidates(state):
            _, record = core.divine(state, target)
            assert record.result is (Species.WEREWOLF if roles[target] is Role.WEREWOLF else Species.HUMAN)
            results.append(record.result)
        assert len(results) == 4
        assert results.count(Species.WEREWOLF) == 1


def test_possessed_divines_as_human():
    state = fresh()
    _, record = core.divine(state, state.agent_with(Role.POSSESSED))
    assert record.result is Species.HUMAN


def test_divine_errors():
    state = fresh()
    with pytest.raises(InvalidTarget):
        core.divine(state, state.seer)
    dead_seer = core.GameState(**{**state.__dict__, "alive": frozenset(AGENT_IDS) - {state.seer}})
    with pytest.raises(SeerDead):
        core.divine(dead_seer, state.werewolf)


def test_attack_rules():
    state = core.next_day(core.start_night(fresh()))
    state = core.start_vote(state)
    with pytest.raises(InvalidTarget):
        core.resolve_attack(state, state.werewolf)
    victim = core.attack_candidates(state)[0]
    after = core.resolve_attack(state, victim)
    assert victim not in after.alive
    with pytest.raises(InvalidTarget):
        core.resolve_attack(after, victim)
    assert after.attacks[-1].attacker == state.werewolf


def test_phase_errors():
    state = fresh()
    with pytest.raises(GameError):
        core.start_vote(state)
    with pytest.raises(GameError):
        core.next_day(state)
    with pytest.raises(NotAlive):
        core.resolve_elimination(core.GameState(**{**state.__dict__, "alive": frozenset({1, 2, 3})}), 5)


def test_operations_do_not_mutate_input():
    state = fresh()
    snapshot = state.to_json()
    core.add_talk(state, TalkEntry(0, 0, 0, 1, "hi"))
    core.divine(state, core.divine_candidates(state)[0])
    assert state.to_json() == snapshot


# -- random play ---------------------------------------------------------------------------


def random_game(seed: int):
    """Drive the rules with random legal actions and return the final state."""
    rng = random.Random(seed)
    state = core.new_game(core.assign_roles(rng), seed)
    state = core.add_talk(state, TalkEntry(0, 0, 0, 1, "hello"))
    state = core.start_night(state)
    state, _ = core.divine(state, rng.choice(core.divine_candidates(state)))
    while state.status is Status.ONGOING:
        state = core.next_day(state)
        assert state.day <= 2
        speaker = rng.choice(sorted(state.alive))
        state = core.add_talk(state, TalkEntry(state.day, 0, 0, speaker, "Skip"))
        state = core.start_vote(state)
        votes = [VoteRecord(state.day, v, rng.choice(core.vote_candidates(state, v))) for v in sorted(state.alive)]
        state = core.record_votes(state, votes)
        state = core.resolve_elimination(state, core.tally_votes(votes, state.alive, rng))
        if state.status is not Status.ONGOING:
            break
        state = core.resolve_attack(state, rng.choice(core.attack_candidates(state)))
        if state.status is Status.ONGOING and state.seer in state.alive:
            state, _ = core.divine(state, rng.choice(core.divine_candidates(state)))
    return state


@settings(max_examples=300)
@given(st.integers(0, 2**32))
def test_random_games_end_by_day_two(seed):
    state = random_game(seed)
    assert state.status is not Status.ONGOING
    assert state.day <= 2
    assert (state.status is Status.HUMAN_WIN) == (state.werewolf not in state.alive)
    assert 1 <= len(state.alive) <= 5


@settings(max_examples=100)
@given(st.integers(0, 2**32))
def test_random_games_never_record_dead_actors(seed):
    state = random_game(seed)
    eliminated_at = {}
    for e in state.executions:
        eliminated_at.setdefault(e.target, (e.day, 1))
    for a in state.attacks:
        eliminated_at.setdefault(a.target, (a.day, 2))
    # Talk and votes happen before that day's execution; the night attack comes after.
    for t in state.talks:
        assert t.agent not in eliminated_at or eliminated_at[t.agent][0] >= t.day
    for v in state.votes:
        assert v.voter not in eliminated_at or eliminated_at[v.voter][0] >= v.day
    for a in state.attacks:
        assert a.attacker not in eliminated_at or eliminated_at[a.attacker][0] > a.day


def test_dead_actors_are_rejected():
    state = core.next_day(core.start_night(fresh()))
    dead = core.attack_candidates(state)[0]
    state = core.resolve_attack(state, dead)
    with pytest.raises(NotAlive):
        core.add_talk(state, TalkEntry(1, 0, 0, dead, "hi"))
    state = core.start_vote(state)
    votes = [VoteRecord(1, v, core.vote_candidates(state, v)[0]) for v in sorted(state.alive)]
    with pytest.raises(InvalidVote):
        core.record_votes(state, votes + [VoteRecord(1, dead, votes[0].voter)])


@given(st.integers(0, 2**32))
def test_random_game_is_reproducible(seed):
    assert random_game(seed).to_json() == random_game(seed).to_json()


def test_no_mutation_after_finish():
    state = random_game(1)
    with pytest.raises(GameFinished):
        core.next_day(state)
    with pytest.raises(GameFinished):
        core.resolve_elimination(state, min(state.alive))
    assert state.phase in (Phase.NIGHT, Phase.VOTE)
