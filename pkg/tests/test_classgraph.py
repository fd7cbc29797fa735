import json
from fractions import Fraction

import pytest

from conftest import fixture_text, load, random_ita_minus
from src.config import get_settings
from src.ita.classgraph import (
    EdgeKind, NodeTag, class_of, discrete_successor, explore, initial_class, reachable, render_path,
    render_preorder, time_successor, to_dot, to_json, untimed_automaton,
)
from src.ita.errors import ClassCapExceeded, StepError
from src.ita.expressions import build_expression_sets, build_expression_sets_with_formula
from src.ita.model import Policy
from src.ita.semantics import Configuration, discrete_step, random_runs, time_step, trace
from src.ita.tctl import comparisons_of, label_comparisons, parse_formula

GOLDEN = json.loads(fixture_text("a1_classgraph.json"))


def test_initial_class_orders_constants(a1):
    esets = build_expression_sets(a1)
    node = initial_class(a1, esets)
    assert node.state == "q0"
    assert render_preorder(node.preorders[0], esets.at(1)) == "x1 = 0 < 1 < 2"


def test_time_successor_opens_interval(a1):
    esets = build_expression_sets(a1)
    node = time_successor(a1, initial_class(a1, esets))
    assert render_preorder(node.preorders[0], esets.at(1)) == "0 < x1 < 1 < 2"
    half = class_of(a1, esets, Configuration("q0", (Fraction(1, 2), Fraction(0))))
    assert node == half


def test_discrete_successor_from_initial_class(a1):
    esets = build_expression_sets(a1)
    node = discrete_successor(a1, esets, initial_class(a1, esets), a1.transitions[0])
    assert node.state == "q1"
    assert render_preorder(node.preorders[1], esets.at(2)) == "x2 = 0 < -1/2*x1 + 1"


def test_guard_blocks_discrete_successor(a1):
    esets = build_expression_sets(a1)
    at_one = class_of(a1, esets, Configuration("q0", (Fraction(1), Fraction(0))))
    assert discrete_successor(a1, esets, at_one, a1.transitions[0]) is None


def test_last_time_class_has_no_time_edge(a1):
    esets = build_expression_sets(a1)
    late = class_of(a1, esets, Configuration("q0", (Fraction(3), Fraction(0))))
    assert time_successor(a1, late) is None


def test_class_of_valuation_in_second_level(a1):
    esets = build_expression_sets(a1)
    node = class_of(a1, esets, Configuration("q1", (Fraction(7, 10), Fraction(13, 20))))
    assert render_preorder(node.preorders[1], esets.at(2)) == "0 < x2 = -1/2*x1 + 1"
    b = discrete_successor(a1, esets, node, a1.transitions[1])
    assert b.state == "q2"
    assert b.preorders == node.preorders


def test_reachability(a1, a1_strengthened):
    hit, path = reachable(a1, "q2")
    assert hit
    assert [kind for kind, _ in path].count(EdgeKind.DISCRETE) == 2
    assert render_path(a1, path).endswith("b#1")
    assert reachable(a1, "q0") == (True, [])
    assert reachable(a1_strengthened, "q2") == (False, [])


def test_reachability_by_label(policies):
    hit, path = reachable(policies, "safe")
    assert hit
    assert render_path(policies, path) == "go#0 time stop#1"


def test_delayed_classes_are_tagged(policies):
    g = explore(policies)
    tags = {g.node(n).tag for n in range(len(g)) if g.node(n).state == "wait"}
    assert NodeTag.MINUS in tags
    assert NodeTag.PLUS in tags


def test_class_cap(a1):
    with pytest.raises(ClassCapExceeded):
        explore(a1, max_classes=2)


def test_untimed_language(a1, a4):
    assert untimed_automaton(a1).eliminate_epsilon().language_up_to(4) == frozenset({("a", "b")})
    assert untimed_automaton(a4).language_up_to(3) == frozenset({("c",), ("c", "c"), ("c", "c", "c")})


def test_untimed_language_without_finals():
    assert untimed_automaton(load("no_finals.ita")).language_up_to(3) == frozenset()


def test_epsilon_elimination_keeps_language(a1):
    automaton = untimed_automaton(a1)
    assert automaton.accepts(["a", "b"])
    assert not automaton.accepts(["a"])
    assert automaton.eliminate_epsilon().accepts(["a", "b"])


def test_dot_export(a1):
    g = explore(a1)
    source = to_dot(g, highlight=[0])
    assert "style=dashed" in source
    assert "fillcolor=lightgrey" in source
    assert to_dot(explore(a1)) == to_dot(g)


def test_json_export(a1):
    g = explore(a1)
    exported = to_json(g)
    assert exported["initial"] == 0
    assert len(exported["nodes"]) == len(g)
    assert {e["kind"] for e in exported["edges"]} == {"time", "discrete"}
    assert any(node["accepting"] for node in exported["nodes"])


@pytest.mark.parametrize("seed", range(8))
def test_random_runs_stay_inside_reachable_classes(seed):
    model = random_ita_minus(seed)
    g = explore(model)
    for run in random_runs(model, count=5, max_steps=5, seed=seed):
        for configuration in trace(model, run):
            assert g.id_of(class_of(model, g.esets, configuration)) is not None


def _renders(g):
    return sorted(node.render(g.esets) for node in g.classes)


def _edge_lines(g):
    lines = []
    for u, v, kind, tid in g.edges():
        label = "time" if kind is EdgeKind.TIME else g.model.transition(tid).letter
        lines.append(f"{g.node(u).render(g.esets)} --{label}--> {g.node(v).render(g.esets)}")
    return sorted(lines)


def test_two_level_class_graph_matches_golden(a1):
    expected = GOLDEN["plain"]
    g = explore(a1)
    assert _renders(g) == sorted(expected["classes"])
    assert _edge_lines(g) == sorted(expected["edges"])
    source = to_dot(g)
    for line in expected["classes"]:
        assert line in source
    assert len(to_json(g)["edges"]) == len(expected["edges"])


def test_formula_extended_class_graph_matches_golden(a1):
    expected = GOLDEN["formula"]
    comparisons = comparisons_of(parse_formula(expected["formula"]))
    g = explore(a1, build_expression_sets_with_formula(a1, comparisons))
    assert _renders(g) == sorted(expected["classes"])
    assert g.graph.number_of_edges() == expected["edge_count"]
    labeled = label_comparisons(g, comparisons)
    greyed = set().union(*labeled.comparisons.values())
    assert sorted(g.node(n).render(g.esets) for n in greyed) == sorted(expected["highlighted"])
    source = to_dot(g, highlight=greyed)
    assert source.count("fillcolor=lightgrey") == len(expected["highlighted"])


def _configurations(seeds, runs=10, steps=6):
    for seed in seeds:
        model = random_ita_minus(seed)
        esets = build_expression_sets(model)
        for run in random_runs(model, count=runs, max_steps=steps, seed=seed):
            for configuration in trace(model, run):
                yield model, esets, configuration


def test_discrete_steps_land_in_discrete_successor():
    checked = 0
    for model, esets, c in _configurations(range(30)):
        node = class_of(model, esets, c)
        for t in model.outgoing.get(c.state, ()):
            try:
                after = discrete_step(model, c, t)
            except StepError:
                continue
            assert class_of(model, esets, after) == discrete_successor(model, esets, node, t)
            checked += 1
    assert checked >= 200


def _time_chain(model, node):
    chain = [node]
    while len(chain) < 1000:
        following = time_successor(model, chain[-1])
        if following is None:
            break
        chain.append(following)
    return chain


def test_time_steps_follow_time_successors():
    checked = 0
    for model, esets, c in _configurations(range(30)):
        if model.policy(c.state) is Policy.URGENT:
            continue
        chain = _time_chain(model, class_of(model, esets, c))
        for d in (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(5, 2)):
            assert class_of(model, esets, time_step(model, c, d)) in chain
            checked += 1
    assert checked >= 200


@pytest.mark.parametrize("seed", range(4))
def test_parallel_exploration_matches_sequential(seed):
    model = random_ita_minus(seed)
    assert to_json(explore(model, jobs=3)) == to_json(explore(model, jobs=1))


def test_parallel_exploration_respects_cap(a1, monkeypatch):
    monkeypatch.setenv("ITA_JOBS", "2")
    get_settings.cache_clear()
    with pytest.raises(ClassCapExceeded):
        explore(a1, max_classes=2)
