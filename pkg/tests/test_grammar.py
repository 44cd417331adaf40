import pytest
from hypothesis import given
from hypothesis import strategies as st

from wolfdial.core import Role, Species
from wolfdial.grammar import (
    agent_tag,
    claim_sentence,
    divine_plan_sentence,
    extract_choice,
    extract_target,
    find_claims,
    find_reports,
    report_sentence,
    vote_sentence,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Answer: Agent[03]", 3),
        ("I suspect Agent 2, but in the end Agent[05].", 5),
        ("Agent[01] looks odd, Agent[04] is calm.\nAnswer: Agent[01]", 1),
        ("Let's think step by step.\nThe werewolf is probably player\n4", 4),
        ("agent3 is my pick", 3),
        ("Nobody stands out.", None),
        ("In 2 turns we vote.\nNo idea.", None),
        ("S-so, the reason I chose to divine Agent[05] is simple. I will vote for Agent[05].", 5),
    ],
)
def test_extract_target(text, expected):
    assert extract_target(text) == expected


@given(st.integers(1, 5), st.text(alphabet=st.characters(blacklist_characters="0123456789[]"), max_size=40))
def test_tag_at_the_end_wins(n, prefix):
    assert extract_target(f"{prefix} Agent[0{(n % 5) + 1}]. Answer: {agent_tag(n)}") == n


def test_extract_choice():
    assert extract_choice("Option 2 looks fine.\nStrategy: 3", 5) == 3
    assert extract_choice("Strategy: 9", 5) is None
    assert extract_choice("none", 5) is None


def test_claims_and_reports():
    text = "Hear me. I am the Seer. I divined Agent[05], and the result is a werewolf."
    assert find_claims(text) == [Role.SEER]
    assert find_reports(text) == [(5, Species.WEREWOLF)]
    assert find_claims("I'm the real seer and I'm a villager? No.") == [Role.SEER, Role.VILLAGER]
    assert find_reports("I will divine Agent[03] tonight.") == []
    assert find_claims("Agent[02] says they are the Seer.") == []


@pytest.mark.parametrize("species", list(Species))
def test_sentence_helpers_parse_back(species):
    assert find_claims(claim_sentence(Role.POSSESSED)) == [Role.POSSESSED]
    assert find_reports(report_sentence(4, species)) == [(4, species)]
    assert extract_target(vote_sentence(2)) == 2
    assert extract_target(divine_plan_sentence(3) + " " + vote_sentence(1)) == 1
