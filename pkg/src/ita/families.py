"""
Parametric model families used as stress fixtures
"""
from typing import List

from .model import ITAModel, StateDecl, make_transition
from .numerics import LinExpr, Update


def first_primes(count: int) -> List[int]:
    primes: List[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def prime_family(n: int) -> ITAModel:
    """Two level-n states whose loops write x_k := x_{k-1} or x_k := p_k * x_{k-1}

    x_0 stands for the constant 1. The frozen clocks can take every product of
    distinct primes, so the ITA without frozen updates needs exponentially many
    states.
    """
    if n < 1:
        raise ValueError("the family starts at n = 1")
    init = StateDecl("init", n, initial=True)
    loop = StateDecl("q", n, final=True)

    def previous(k: int, factor: int) -> LinExpr:
        if k == 1:
            return LinExpr.constant(factor)
        return LinExpr.var(k - 1, factor)

    transitions = [
        make_transition(0, init, loop, n, letter="start",
                        update=Update.build({k: LinExpr.constant(1) for k in range(1, n + 1)}))
    ]
    for k, prime in enumerate(first_primes(n), start=1):
        for factor in (1, prime):
            transitions.append(make_transition(
                len(transitions), loop, loop, n, letter=f"u{k}",
                update=Update.build({k: previous(k, factor)}),
            ))
    return ITAModel(f"primes{n}", n, (init, loop), tuple(transitions))
