"""
Operational semantics: configurations, time and discrete steps, run replay
"""
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .errors import ItaSyntaxError, StepError
from .model import EPSILON, ITAModel, Policy, TransitionDecl
from .numerics import Number, Valuation, apply_update, format_rational, parse_rational, zero_valuation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Configuration:
    state: str
    valuation: Valuation
    beta: bool = False

    def render(self) -> str:
        values = ", ".join(format_rational(v) for v in self.valuation)
        return f"({self.state}, ({values}), {'T' if self.beta else 'F'})"


@dataclass(frozen=True)
class TimeStep:
    delay: Fraction


@dataclass(frozen=True)
class FireStep:
    """Discrete step by transition id, or by letter resolved during replay"""

    transition: Union[int, str]


RunStep = Union[TimeStep, FireStep]
TimedWord = Tuple[Tuple[str, Fraction], ...]


def initial_configuration(m: ITAModel) -> Configuration:
    return Configuration(m.initial_state.name, zero_valuation(m.clocks), False)


def time_step(m: ITAModel, c: Configuration, d: Number) -> Configuration:
    d = Fraction(d)
    if d < 0:
        raise StepError(f"negative delay {d}")
    if d == 0:
        return c
    if m.policy(c.state) is Policy.URGENT:
        raise StepError(f"state {c.state} is urgent: only time steps of duration 0 are allowed")
    level = m.level(c.state)
    values = list(c.valuation)
    values[level - 1] += d
    return Configuration(c.state, tuple(values), True)


def discrete_step(m: ITAModel, c: Configuration, t: TransitionDecl) -> Configuration:
    if t.source != c.state:
        raise StepError(f"transition {t.tid} does not leave {c.state}")
    if m.policy(c.state) is Policy.DELAYED and not c.beta:
        raise StepError(f"state {c.state} is delayed: discrete steps are forbidden before time elapses")
    if not t.guard_holds(c.valuation):
        raise StepError(f"guard of transition {t.tid} not satisfied in {c.render()}")
    return Configuration(t.target, apply_update(c.valuation, t.update), False)


def enabled(m: ITAModel, c: Configuration, t: TransitionDecl) -> bool:
    try:
        discrete_step(m, c, t)
    except StepError:
        return False
    return True


def resolve_transition(m: ITAModel, c: Configuration, ref: Union[int, str]) -> TransitionDecl:
    """Transition id, or first enabled transition from the current state carrying the letter"""
    if isinstance(ref, int):
        if not 0 <= ref < len(m.transitions):
            raise StepError(f"unknown transition {ref}")
        return m.transition(ref)
    letter = None if ref == EPSILON else ref
    candidates = [t for t in m.outgoing.get(c.state, ()) if t.letter == letter]
    for t in candidates:
        if enabled(m, c, t):
            return t
    if candidates:
        return candidates[0]
    raise StepError(f"no transition labelled {ref} leaves {c.state}")


def iter_run(m: ITAModel, steps: Iterable[RunStep]) -> Iterable[Tuple[Configuration, Optional[Tuple[str, Fraction]], Fraction]]:
    """Yield (configuration, emitted event or None, global time) after every step"""
    c = initial_configuration(m)
    now = Fraction(0)
    for index, step in enumerate(steps):
        try:
            if isinstance(step, TimeStep):
                c = time_step(m, c, step.delay)
                now += step.delay
                yield c, None, now
            else:
                t = resolve_transition(m, c, step.transition)
                c = discrete_step(m, c, t)
                event = None if t.is_epsilon else (t.letter, now)
                yield c, event, now
        except StepError as e:
            raise StepError(str(e), step_index=index) from e


def replay(m: ITAModel, steps: Sequence[RunStep]) -> Tuple[Configuration, TimedWord]:
    c = initial_configuration(m)
    word: List[Tuple[str, Fraction]] = []
    for c, event, _ in iter_run(m, steps):
        if event is not None:
            word.append(event)
    return c, tuple(word)


def trace(m: ITAModel, steps: Sequence[RunStep]) -> List[Configuration]:
    """Every configuration visited, starting with the initial one"""
    return [initial_configuration(m)] + [c for c, _, _ in iter_run(m, steps)]


def resolve_run(m: ITAModel, steps: Sequence[RunStep]) -> List[RunStep]:
    """Replace letter references with transition ids"""
    resolved: List[RunStep] = []
    c = initial_configuration(m)
    for index, step in enumerate(steps):
        try:
            if isinstance(step, TimeStep):
                c = time_step(m, c, step.delay)
                resolved.append(step)
            else:
                t = resolve_transition(m, c, step.transition)
                c = discrete_step(m, c, t)
                resolved.append(FireStep(t.tid))
        except StepError as e:
            raise StepError(str(e), step_index=index) from e
    return resolved


def accepts(m: ITAModel, word: Sequence[Tuple[str, Number]], witness: Sequence[RunStep]) -> bool:
    try:
        final, emitted = replay(m, witness)
    except StepError:
        return False
    expected = tuple((letter, Fraction(time)) for letter, time in word)
    return emitted == expected and final.state in m.finals


def run_duration(steps: Sequence[RunStep]) -> Fraction:
    return sum((s.delay for s in steps if isinstance(s, TimeStep)), Fraction(0))


# ---------------------------------------------------------------------------
# Delay intervals and random runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelayInterval:
    low: Fraction
    low_strict: bool = False
    high: Optional[Fraction] = None
    high_strict: bool = False

    def contains(self, d: Fraction) -> bool:
        if d < self.low or (self.low_strict and d == self.low):
            return False
        if self.high is not None and (d > self.high or (self.high_strict and d == self.high)):
            return False
        return True

    def sample(self, rng: random.Random, max_denominator: int = 4) -> Fraction:
        if self.high is not None and self.high == self.low:
            return self.low
        span = (self.high - self.low) if self.high is not None else Fraction(3)
        denominator = rng.randint(1, max_denominator)
        candidates = [
            self.low + span * Fraction(k, denominator)
            for k in range(0, denominator + 1)
        ]
        inside = [d for d in candidates if self.contains(d)]
        if inside:
            return rng.choice(inside)
        return self.low + span / 2


def enabling_interval(m: ITAModel, c: Configuration, t: TransitionDecl) -> Optional[DelayInterval]:
    """Delays d such that t can fire after waiting d from c"""
    if t.source != c.state:
        return None
    level = m.level(c.state)
    low, low_strict = Fraction(0), False
    high: Optional[Fraction] = None
    high_strict = False
    if m.policy(c.state) is Policy.URGENT:
        high = Fraction(0)
    elif m.policy(c.state) is Policy.DELAYED and not c.beta:
        low_strict = True

    for atom in t.guard:
        # atom value after delay d: base + slope * d
        base = atom.expr.evaluate(c.valuation)
        slope = atom.expr.coeff(level)
        if slope == 0:
            if not atom.op.holds(base):
                return None
            continue
        root = -base / slope
        op = atom.op if slope > 0 else atom.op.flipped()
        # now the constraint reads d op' root, with op' from `d - root op 0`
        if op.value in ("<", "<="):
            strict = op.value == "<"
            if high is None or root < high or (root == high and strict):
                high, high_strict = root, strict
        elif op.value in (">", ">="):
            strict = op.value == ">"
            if root > low or (root == low and strict):
                low, low_strict = root, strict
        else:
            if root < low or (root == low and low_strict):
                return None
            if high is not None and (root > high or (root == high and high_strict)):
                return None
            low, low_strict, high, high_strict = root, False, root, False

    if high is not None:
        if high < low or (high == low and (low_strict or high_strict)):
            return None
    return DelayInterval(low, low_strict, high, high_strict)


def random_runs(m: ITAModel, count: int, max_steps: int, seed: int,
                max_denominator: int = 4) -> List[List[RunStep]]:
    """Seeded random runs that replay successfully"""
    rng = random.Random(seed)
    runs = []
    for _ in range(count):
        c = initial_configuration(m)
        steps: List[RunStep] = []
        for _ in range(rng.randint(0, max_steps)):
            options = []
            for t in m.outgoing.get(c.state, ()):
                interval = enabling_interval(m, c, t)
                if interval is not None:
                    options.append((t, interval))
            if not options:
                break
            t, interval = rng.choice(options)
            d = interval.sample(rng, max_denominator)
            steps.append(TimeStep(d))
            steps.append(FireStep(t.tid))
            c = discrete_step(m, time_step(m, c, d), t)
        if m.policy(c.state) is not Policy.URGENT and rng.random() < 0.5:
            steps.append(TimeStep(Fraction(rng.randint(0, 3 * max_denominator), max_denominator)))
        runs.append(steps)
    logger.debug("generated %d random runs for %s", len(runs), m.name)
    return runs


# ---------------------------------------------------------------------------
# Run files
# ---------------------------------------------------------------------------

def parse_run(text: str) -> List[RunStep]:
    """`time p/q` and `fire <id|letter>` lines; blank lines and `#` comments ignored"""
    steps: List[RunStep] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("time", "fire"):
            raise ItaSyntaxError(f"expected 'time <delay>' or 'fire <transition>', got {line!r}", number, 1)
        keyword, argument = parts
        if keyword == "time":
            try:
                steps.append(TimeStep(parse_rational(argument)))
            except (ValueError, ZeroDivisionError) as e:
                raise ItaSyntaxError(f"bad delay {argument!r}", number, len(keyword) + 2) from e
        else:
            steps.append(FireStep(int(argument) if argument.isdigit() else argument))
    return steps


def render_run(steps: Sequence[RunStep]) -> str:
    lines = []
    for step in steps:
        if isinstance(step, TimeStep):
            lines.append(f"time {format_rational(step.delay)}")
        else:
            lines.append(f"fire {step.transition}")
    return "\n".join(lines) + ("\n" if lines else "")


def render_word(word: TimedWord) -> str:
    return "".join(f"({letter},{format_rational(time)})" for letter, time in word)
