"""
Command layer shared by the CLI and the MCP tools

Every command takes model source text plus options and returns a
CommandResult; parse, model, step and formula errors become exit code 3,
resource caps exit code 4.
"""
import json
import logging
from functools import wraps
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from .ita.classgraph import explore, reachable, render_path, to_dot, to_json, untimed_automaton
from .ita.errors import ItaError, ModelError, ResourceCapExceeded
from .ita.expressions import build_expression_sets_with_formula
from .ita.itaminus import build_ita_minus
from .ita.lpreach import bounded_reach, constant_bits, general_ita_bound_terms
from .ita.model import ITAModel, complete_resets, is_ita_minus, parse_ita, render_ita, validate
from .ita.numerics import format_rational
from .ita.semantics import RunStep, parse_run, render_run, render_word, replay, run_duration
from .ita.tctl import Logic, check_formula, comparisons_of, label_comparisons, parse_formula

logger = logging.getLogger(__name__)

SCHEMA = 1

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INCOMPLETE = 2
EXIT_INPUT = 3
EXIT_CAP = 4


class CommandResult(BaseModel):
    payload: Dict[str, Any]
    text: str
    diagnostics: List[str] = Field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def is_error(self) -> bool:
        return self.exit_code in (EXIT_INPUT, EXIT_CAP)

    def to_json(self) -> str:
        return json.dumps(self.payload, indent=2, sort_keys=True)


def _result(command: str, text: str, exit_code: int = EXIT_OK,
            diagnostics: Sequence[str] = (), **payload) -> CommandResult:
    body = {"schema": SCHEMA, "command": command, **payload}
    return CommandResult(payload=body, text=text, diagnostics=list(diagnostics), exit_code=exit_code)


def command(name: str):
    """Turn toolkit errors raised by a command into exit codes 3 and 4"""

    def decorate(fn: Callable[..., CommandResult]) -> Callable[..., CommandResult]:
        @wraps(fn)
        def wrapper(*args, **kwargs) -> CommandResult:
            logger.info("%s started", name)
            try:
                result = fn(*args, **kwargs)
            except ResourceCapExceeded as e:
                logger.warning("%s stopped by a resource cap: %s", name, e)
                return _result(name, f"resource cap exceeded: {e}", EXIT_CAP, [str(e)],
                               error={"kind": type(e).__name__, "message": str(e), "limit": e.limit})
            except (ItaError, OSError) as e:
                logger.info("%s rejected its input: %s", name, e)
                error = {"kind": type(e).__name__, "message": str(e)}
                for attribute in ("line", "column", "step_index"):
                    if getattr(e, attribute, None) is not None:
                        error[attribute] = getattr(e, attribute)
                return _result(name, f"error: {e}", EXIT_INPUT, [str(e)], error=error)
            logger.info("%s finished with exit code %d", name, result.exit_code)
            return result

        return wrapper

    return decorate


def load_model(text: str) -> ITAModel:
    """Parse and validate; structural violations raise ModelError"""
    m = parse_ita(text)
    violations = validate(m)
    if violations:
        raise ModelError("; ".join(violations))
    return m


def run_payload(m: ITAModel, steps: Sequence[RunStep]) -> Dict[str, Any]:
    final, word = replay(m, steps)
    return {
        "run": render_run(steps),
        "word": render_word(word),
        "duration": format_rational(run_duration(steps)),
        "final": final.render(),
    }


def _render_bound(bound: int) -> str:
    if bound.bit_length() <= 256:
        return str(bound)
    return f"~2^{bound.bit_length() - 1}"


def _check_target(m: ITAModel, target: str) -> None:
    if target not in m.propositions:
        raise ModelError(f"unknown state or label {target!r}")


@command("validate")
def cmd_validate(model_text: str, require_ita_minus: bool = False,
                 complete: bool = False) -> CommandResult:
    m = parse_ita(model_text)
    extra: Dict[str, Any] = {}
    if complete:
        m = complete_resets(m)
        extra["ita"] = render_ita(m)
    violations = validate(m)
    if not violations and require_ita_minus:
        violations = is_ita_minus(m)[1]
    if violations:
        return _result("validate", "\n".join(violations), EXIT_FALSE, violations,
                       model=m.name, valid=False, violations=violations, **extra)
    return _result("validate", extra.get("ita", "ok"), model=m.name, valid=True, violations=[],
                   ita_minus=is_ita_minus(m)[0], **extra)


@command("simulate")
def cmd_simulate(model_text: str, run_text: str) -> CommandResult:
    m = load_model(model_text)
    steps = parse_run(run_text)
    payload = run_payload(m, steps)
    final, _ = replay(m, steps)
    accepted = final.state in m.finals
    text = f"{payload['final']} {payload['word'] or '(empty word)'}"
    return _result("simulate", text, model=m.name, accepted=accepted, **payload)


@command("classgraph")
def cmd_classgraph(model_text: str, fmt: str = "json", formula: Optional[str] = None,
                   max_classes: Optional[int] = None, max_exprs: Optional[int] = None,
                   dump_expressions: bool = False, jobs: Optional[int] = None) -> CommandResult:
    m = load_model(model_text)
    comparisons = comparisons_of(parse_formula(formula)) if formula else []
    esets = build_expression_sets_with_formula(m, comparisons, max_exprs=max_exprs)
    g = explore(m, esets, max_classes=max_classes, jobs=jobs)
    labeled = label_comparisons(g, comparisons)
    labels = {
        f"{expr} {op.value} 0": sorted(nodes)
        for (expr, op), nodes in labeled.comparisons.items()
    }
    highlighted = set().union(*labeled.comparisons.values()) if comparisons else set()
    payload = {
        "model": m.name,
        "classes": len(g),
        "expression_sets": esets.to_json(),
        "labels": labels,
    }
    if fmt == "dot":
        payload["dot"] = to_dot(g, highlight=highlighted)
        text = payload["dot"]
    else:
        payload["graph"] = to_json(g)
        text = f"{len(g)} classes, {g.graph.number_of_edges()} edges"
    if dump_expressions:
        text = esets.render()
    return _result("classgraph", text, **payload)


@command("reach")
def cmd_reach(model_text: str, target: str, method: str = "both", depth: Optional[int] = None,
              max_classes: Optional[int] = None, jobs: Optional[int] = None) -> CommandResult:
    m = load_model(model_text)
    _check_target(m, target)
    payload: Dict[str, Any] = {"model": m.name, "target": target, "method": method}
    diagnostics: List[str] = []
    verdict = None
    exit_code = EXIT_OK

    if method in ("classgraph", "both"):
        hit, path = reachable(m, target, explore(m, max_classes=max_classes, jobs=jobs))
        payload["classgraph"] = {"reachable": hit, "path": render_path(m, path) if hit else None}
        verdict = hit
        exit_code = EXIT_OK if hit else EXIT_FALSE

    if method in ("bounded", "both"):
        found = bounded_reach(m, target, depth=depth, jobs=jobs)
        bounded: Dict[str, Any] = {
            "reachable": found.hit,
            "complete": found.complete,
            "depth": found.depth,
            "bound": _render_bound(found.bound),
            "explored": found.explored,
            "transformed": found.transformed,
        }
        if found.transformed:
            base, exponent = general_ita_bound_terms(m.clocks, constant_bits(m), len(m.transitions))
            bounded["general_bound"] = f"{base}^{exponent}"
        if found.witness is not None:
            bounded["witness"] = run_payload(m, found.witness)
        payload["bounded"] = bounded
        if verdict is None:
            verdict = found.hit
            exit_code = EXIT_OK if found.hit else (EXIT_FALSE if found.complete else EXIT_INCOMPLETE)
        elif found.hit != verdict and (found.hit or found.complete):
            diagnostics.append("class graph and bounded search disagree")
        elif verdict and not found.hit:
            diagnostics.append(f"bounded search stopped at depth {found.depth} without a witness")

    payload["reachable"] = verdict
    text = f"{target} {'reachable' if verdict else 'unreachable'}"
    if exit_code == EXIT_INCOMPLETE:
        text = f"{target} not reached up to depth {payload['bounded']['depth']} (incomplete)"
    return _result("reach", text, exit_code, diagnostics, **payload)


@command("to-ita-minus")
def cmd_to_ita_minus(model_text: str, max_states: Optional[int] = None,
                     max_exprs: Optional[int] = None) -> CommandResult:
    m = load_model(model_text)
    result = build_ita_minus(m, max_states=max_states, max_exprs=max_exprs)
    source = render_ita(result.model)
    return _result(
        "to-ita-minus", source,
        model=m.name,
        ita=source,
        states=len(result.model.states),
        transitions=len(result.model.transitions),
        fsets=result.fsets.render(),
        origins=list(result.origins),
    )


@command("untimed")
def cmd_untimed(model_text: str, fmt: str = "json", eliminate_epsilon: bool = False,
                words: int = 0, max_classes: Optional[int] = None,
                jobs: Optional[int] = None) -> CommandResult:
    m = load_model(model_text)
    automaton = untimed_automaton(m, explore(m, max_classes=max_classes, jobs=jobs))
    if eliminate_epsilon:
        automaton = automaton.eliminate_epsilon()
    payload: Dict[str, Any] = {"model": m.name, "automaton": automaton.to_json()}
    if words:
        payload["words"] = sorted(" ".join(w) for w in automaton.language_up_to(words))
    if fmt == "dot":
        payload["dot"] = automaton.to_dot(f"{m.name}_untimed")
        text = payload["dot"]
    else:
        text = f"{len(automaton.states)} states, {len(automaton.transitions)} transitions"
    return _result("untimed", text, **payload)


@command("check")
def cmd_check(model_text: str, formula: str, depth: Optional[int] = None,
              max_classes: Optional[int] = None, max_exprs: Optional[int] = None,
              jobs: Optional[int] = None) -> CommandResult:
    m = load_model(model_text)
    f = parse_formula(formula)
    checked = check_formula(m, f, depth=depth, max_classes=max_classes, max_exprs=max_exprs,
                            jobs=jobs)
    payload: Dict[str, Any] = {
        "model": m.name,
        "formula": str(f),
        "logic": checked.logic.value,
        "verdict": checked.verdict,
        "complete": checked.complete,
        "procedure": checked.procedure,
    }
    if checked.evidence is not None:
        payload["evidence"] = run_payload(m, checked.evidence)
    if checked.logic is Logic.CLOCK_CTL:
        payload["classes"] = len(checked.detail.labeled.graph)
        payload["satisfying"] = sorted(checked.detail.satisfying)
    elif checked.detail.pumped is not None:
        payload["pumped"] = list(checked.detail.pumped)
    if not checked.complete:
        exit_code = EXIT_INCOMPLETE
    else:
        exit_code = EXIT_OK if checked.verdict else EXIT_FALSE
    text = f"{'true' if checked.verdict else 'false'} ({checked.procedure})"
    if not checked.complete:
        text += " [bounded search incomplete]"
    return _result("check", text, exit_code, **payload)
