"""
Shared fixtures: bundled models and a seeded generator of small ITA⁻
"""
import random
from pathlib import Path

import pytest

from src.config import get_settings
from src.ita.model import GuardAtom, ITAModel, Policy, StateDecl, make_transition, parse_ita
from src.ita.numerics import Comparator, LinExpr, Update
from src.storage import reset_result_cache

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load(name: str) -> ITAModel:
    return parse_ita(fixture_text(name))


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Every test sees default settings and an empty in-memory result cache"""
    monkeypatch.setenv("STORAGE_TYPE", "memory")
    get_settings.cache_clear()
    reset_result_cache()
    yield
    get_settings.cache_clear()
    reset_result_cache()


@pytest.fixture
def a1() -> ITAModel:
    return load("a1.ita")


@pytest.fixture
def a1_strengthened() -> ITAModel:
    return load("a1_strengthened.ita")


@pytest.fixture
def a2() -> ITAModel:
    return load("a2.ita")


@pytest.fixture
def a4() -> ITAModel:
    return load("a4.ita")


@pytest.fixture
def a4_bounded() -> ITAModel:
    return load("a4_bounded.ita")


@pytest.fixture
def policies() -> ITAModel:
    return load("policies.ita")


@pytest.fixture
def single() -> ITAModel:
    return load("single.ita")


def random_ita_minus(seed: int, states: int = 4, clocks: int = 2, transitions: int = 6) -> ITAModel:
    """Small ITA⁻ with integer guards and resets of the source-level clock only"""
    rng = random.Random(seed)
    decls = []
    for i in range(states):
        decls.append(StateDecl(
            name=f"s{i}",
            level=1 if i == 0 else rng.randint(1, clocks),
            policy=rng.choice([Policy.LAZY, Policy.LAZY, Policy.DELAYED, Policy.URGENT]),
            initial=i == 0,
            final=i == states - 1,
        ))
    built = []
    for tid in range(transitions):
        source = rng.choice(decls)
        target = rng.choice(decls)
        level = source.level
        guard = []
        for _ in range(rng.randint(0, 2)):
            clock = rng.randint(1, level)
            op = rng.choice([Comparator.LT, Comparator.LE, Comparator.GE, Comparator.GT, Comparator.EQ])
            guard.append(GuardAtom(LinExpr.var(clock).shift(-rng.randint(0, 3)), op))
        update = Update()
        if target.level >= level and rng.random() < 0.4:
            update = Update.build({level: LinExpr.constant(rng.randint(0, 2))})
        built.append(make_transition(tid, source, target, clocks, letter=rng.choice("ab"),
                                     guard=guard, update=update))
    return ITAModel(f"random{seed}", clocks, tuple(decls), tuple(built))
