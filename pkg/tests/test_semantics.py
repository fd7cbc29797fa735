import random
from fractions import Fraction

import pytest

from conftest import fixture_text
from src.ita.errors import ItaSyntaxError, StepError
from src.ita.semantics import (
    Configuration, FireStep, TimeStep, accepts, discrete_step, enabling_interval, initial_configuration,
    parse_run, random_runs, render_run, render_word, replay, time_step, trace,
)


def test_time_step_advances_active_clock_only(a1):
    c = Configuration("q1", (Fraction(7, 10), Fraction(0)))
    after = time_step(a1, c, Fraction(13, 20))
    assert after.valuation == (Fraction(7, 10), Fraction(13, 20))
    assert after.beta


def test_discrete_step_freezes_lower_clock(a1):
    c = time_step(a1, initial_configuration(a1), Fraction(7, 10))
    after = discrete_step(a1, c, a1.transitions[0])
    assert after == Configuration("q1", (Fraction(7, 10), Fraction(0)), False)


def test_second_level_guard(a1):
    c = Configuration("q1", (Fraction(7, 10), Fraction(13, 20)), True)
    assert discrete_step(a1, c, a1.transitions[1]).state == "q2"


def test_guard_failure(a1):
    c = time_step(a1, initial_configuration(a1), 1)
    with pytest.raises(StepError, match="guard"):
        discrete_step(a1, c, a1.transitions[0])


def test_replay_run_file(a1):
    final, word = replay(a1, parse_run(fixture_text("a1_run.txt")))
    assert final.state == "q2"
    assert final.valuation == (Fraction(7, 10), Fraction(13, 20))
    assert word == (("a", Fraction(7, 10)), ("b", Fraction(27, 20)))
    assert render_word(word) == "(a,7/10)(b,27/20)"


def test_replay_reports_failing_step(a1):
    steps = [TimeStep(Fraction(1)), FireStep("a")]
    with pytest.raises(StepError) as info:
        replay(a1, steps)
    assert info.value.step_index == 1


def test_accepts_closed_form(a1):
    witness = parse_run(fixture_text("a1_run.txt"))
    assert accepts(a1, [("a", Fraction(7, 10)), ("b", Fraction(27, 20))], witness)
    assert not accepts(a1, [("a", Fraction(7, 10)), ("b", Fraction(13, 10))], witness)
    assert not accepts(a1, [], [])


def test_urgent_state_forbids_elapsing(policies):
    with pytest.raises(StepError, match="urgent"):
        replay(policies, [TimeStep(Fraction(1, 2))])
    final, _ = replay(policies, [TimeStep(Fraction(0)), FireStep("go")])
    assert final.state == "wait"


def test_delayed_state_needs_time_before_firing(policies):
    with pytest.raises(StepError, match="delayed"):
        replay(policies, [FireStep("go"), FireStep("stop")])
    final, word = replay(policies, [FireStep("go"), TimeStep(Fraction(1)), FireStep("stop")])
    assert final.state == "done"
    assert word == (("go", Fraction(0)), ("stop", Fraction(1)))


def test_enabling_interval(a1, policies):
    interval = enabling_interval(a1, initial_configuration(a1), a1.transitions[0])
    assert interval.low == 0 and not interval.low_strict
    assert interval.high == 1 and interval.high_strict

    wait = Configuration("wait", (Fraction(0),), False)
    interval = enabling_interval(policies, wait, policies.transitions[1])
    assert interval.low_strict
    assert interval.high == 2


def test_trace_starts_at_initial_configuration(a1):
    configurations = trace(a1, [TimeStep(Fraction(1, 2)), FireStep(0)])
    assert configurations[0] == initial_configuration(a1)
    assert configurations[-1].state == "q1"


def test_random_runs_replay(a1, a4):
    for model in (a1, a4):
        runs = random_runs(model, count=10, max_steps=4, seed=1)
        assert len(runs) == 10
        for run in runs:
            replay(model, run)


def test_random_runs_are_seeded(a1):
    assert random_runs(a1, 5, 4, seed=7) == random_runs(a1, 5, 4, seed=7)


def test_parse_run_errors():
    with pytest.raises(ItaSyntaxError) as info:
        parse_run("time 1\njump 2\n")
    assert info.value.line == 2
    with pytest.raises(ItaSyntaxError, match="bad delay"):
        parse_run("time soon")


def test_render_run():
    steps = [TimeStep(Fraction(1, 2)), FireStep(0), FireStep("b")]
    assert render_run(steps) == "time 1/2\nfire 0\nfire b\n"
    assert parse_run(render_run(steps)) == steps


def _two_step_witness(tau, second_delay):
    return [TimeStep(tau), FireStep(0), TimeStep(second_delay), FireStep(1)]


def test_two_level_language_members(a1):
    # accepted words are (a, t)(b, 1 + t/2) with 0 <= t < 1
    rng = random.Random(5)
    for _ in range(100):
        q = rng.randint(1, 20)
        tau = Fraction(rng.randrange(q), q)
        word = [("a", tau), ("b", 1 + tau / 2)]
        assert accepts(a1, word, _two_step_witness(tau, 1 - tau / 2)), tau


def test_two_level_language_non_members(a1):
    rng = random.Random(6)
    for case in range(100):
        q = rng.randint(1, 20)
        if case % 2:
            tau = Fraction(rng.randrange(q), q)
            late = Fraction(rng.randint(1, 20), rng.randint(1, 10))
            second = 1 - tau / 2 + late
        else:
            tau = 1 + Fraction(rng.randrange(q), q)
            second = 1 - tau / 2
        word = [("a", tau), ("b", tau + second)]
        assert not accepts(a1, word, _two_step_witness(tau, second)), (tau, second)
