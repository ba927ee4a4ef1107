"""
World-spec files (YAML, JSON loads unchanged).

Layout::

    kind: def2 | def3 | def4 | def1
    name: toy
    signature:
      actions:      [{name: move, values: [Nothing, left, right]}]
      observations: [{name: x, values: [Nothing, zero, one]}]
      groups:       [{name: walking, pattern: ["*"]}]
    states: [s0, s1]
    initial: s0

    # def2
    view: {s0: [one], s1: [zero]}
    transitions:
      - {from: s0, action: [left], outcomes: [[s1, 50, 50], [s0, 50, 50]]}
      - {from: s1, action: [right], split: [{lo: 100, hi: 100, parts: [[s0, 25], [s1, 75]]}]}

    # def3 / def4
    variables: {invisible: [{name: lock, values: [open, shut]}]}
    assignment: {s0: {x: one, lock: open}}
    rules:
      - {from: s0, action: ["*"], when: {lock: open},
         outcomes: [{to: s1, lo: 100, hi: 100, set: {s1.lock: shut}}]}
      - {from: s1, action: ["*"], split: [{lo: 100, hi: 100, parts: [{to: s0, p: 50}, {to: s1, p: 50}]}]}
    noise:          # def4 only
      - {state: s0, variable: x, volume: 0.5, spectrum: {zero: 0.5, one: 0.5}}

Probabilities are integer hundredths. Files written by transforms carry
``exact_rationals: true`` and may use "a/b" strings instead.
A ``split`` entry replaces ``outcomes`` when each outcome is further divided
into parts with exact shares p: the outcome is drawn with its [lo, hi] first,
then one part with probability p.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence

import yaml

from src.world_insight.config import parse_yaml
from src.world_insight.errors import SpecParseError, SpecValidationError
from src.world_insight.world.distribution import (
    HUNDRED,
    IntervalDistribution,
    IntervalOutcome,
    SplitDistribution,
    is_hundredths,
    merge_duplicate_targets,
    validate_distribution,
)
from src.world_insight.world.model import (
    CumulativeState,
    NoiseDescriptor,
    Variable,
    VariableLayout,
    WorldDef2,
    WorldDef3,
    WorldDef4,
)
from src.world_insight.world.signature import Action, Coordinate, MoveGroup, ScalarSignature

logger = logging.getLogger(__name__)

WILDCARD = "*"
KINDS = ("def1", "def2", "def3", "def4")


def read_spec_document(source: str | Path | Mapping[str, Any]) -> dict[str, Any]:
    """Parse a spec file (or pass a mapping through), mapping YAML errors to SpecParseError."""
    if isinstance(source, Mapping):
        return dict(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecParseError(f"cannot read spec: {e}", str(path)) from e
    try:
        document = parse_yaml(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        location = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise SpecParseError(str(getattr(e, "problem", None) or e), location) from e
    if not isinstance(document, dict):
        raise SpecParseError("top level must be a mapping", str(path))
    return document


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise SpecParseError(f"missing {key!r}", where)
    return doc[key]


def _token(value: Any) -> int | str:
    """A value name or index from a document; booleans are neither."""
    if isinstance(value, bool):
        raise ValueError(f"boolean {value!r} is not a value name (quote it)")
    return value if isinstance(value, int) else str(value)


def _names(values: Sequence[Any]) -> tuple[str, ...]:
    if any(isinstance(v, bool) for v in values):
        raise ValueError(f"boolean in value list {list(values)} (quote it)")
    return tuple(str(v) for v in values)


def parse_signature(doc: Mapping[str, Any]) -> ScalarSignature:
    raw = _require(doc, "signature", "spec")
    try:
        actions = tuple(Coordinate(c["name"], _names(c["values"])) for c in raw["actions"])
        observations = tuple(
            Coordinate(c["name"], _names(c["values"])) for c in raw["observations"]
        )
        groups = tuple(
            MoveGroup(
                g["name"],
                tuple(
                    None if str(p) == WILDCARD else coord.index(_token(p))
                    for coord, p in zip(actions, g["pattern"])
                ),
            )
            for g in raw.get("groups", []) or []
        )
        return ScalarSignature(actions, observations, groups)
    except (KeyError, TypeError, ValueError) as e:
        raise SpecParseError(f"bad signature: {e}", "signature") from e


def expand_action(signature: ScalarSignature, pattern: Sequence[Any], where: str) -> list[Action]:
    """All actions matching a per-coordinate pattern of value names, indices or '*'."""
    if len(pattern) != signature.action_dims:
        raise SpecParseError(f"action {list(pattern)} needs {signature.action_dims} coordinates", where)
    try:
        fixed = [
            None if str(p) == WILDCARD else c.index(_token(p))
            for c, p in zip(signature.actions, pattern)
        ]
    except ValueError as e:
        raise SpecParseError(str(e), where) from e
    return [a for a in signature.action_space if all(f is None or f == v for f, v in zip(fixed, a))]


def _probability(value: Any, exact: bool, where: str) -> Fraction:
    if isinstance(value, bool):
        raise SpecParseError("probability must be a number", where)
    if isinstance(value, int):
        return Fraction(value, HUNDRED)
    if exact and isinstance(value, str):
        if "/" not in value:
            raise SpecParseError(f"exact rational {value!r} must be written as a/b", where)
        try:
            return Fraction(value)
        except ValueError as e:
            raise SpecParseError(f"bad rational {value!r}", where) from e
    if isinstance(value, float):
        raise SpecParseError(f"probability {value!r} must be integer hundredths (e.g. 25 for 0.25)", where)
    raise SpecParseError(f"bad probability {value!r}", where)


@dataclass
class SpecCheck:
    """Result of loading a spec: the world (when buildable) and every problem found."""

    world: Any
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def _check_dist(dist: IntervalDistribution, where: str, exact: bool, problems: list[str]) -> None:
    report = validate_distribution(dist, require_hundredths=not exact)
    problems.extend(report.lines(where))


def _build_def2(doc: Mapping[str, Any], signature: ScalarSignature, problems: list[str]) -> WorldDef2:
    exact = bool(doc.get("exact_rationals", False))
    states = tuple(str(s) for s in _require(doc, "states", "spec"))
    initial = str(_require(doc, "initial", "spec"))
    if initial not in states:
        raise SpecParseError(f"initial state {initial!r} is not listed", "initial")
    view: dict[str, tuple[int, ...]] = {}
    for s, values in (_require(doc, "view", "spec") or {}).items():
        where = f"view[{s}]"
        if str(s) not in states:
            raise SpecParseError(f"unknown state {s!r}", where)
        if len(values) != signature.obs_dims:
            raise SpecParseError(f"needs {signature.obs_dims} values", where)
        try:
            view[str(s)] = tuple(
                c.index(_token(v)) for c, v in zip(signature.observations, values)
            )
        except ValueError as e:
            raise SpecParseError(str(e), where) from e
    missing = [s for s in states if s not in view]
    if missing:
        raise SpecParseError(f"states without a view: {missing}", "view")

    transitions: dict[tuple[str, Action], IntervalDistribution] = {}
    for n, entry in enumerate(doc.get("transitions", []) or []):
        where = f"transitions[{n}]"
        source = str(_require(entry, "from", where))
        if source not in states:
            raise SpecParseError(f"unknown state {source!r}", where)
        if "split" in entry:
            dist: IntervalDistribution = _def2_split(entry["split"], states, exact, where)
        else:
            dist = _def2_outcomes(_require(entry, "outcomes", where), states, exact, where)
        for action in expand_action(signature, _require(entry, "action", where), where):
            label = f"{where} ({source}, {signature.action_label(action)})"
            if (source, action) in transitions:
                problems.append(f"{label}: duplicate transition")
            transitions[(source, action)] = dist
        _check_dist(dist, where, exact, problems)
    return WorldDef2(signature, states, initial, transitions, view, name=str(doc.get("name", "def2")))


def _def2_outcomes(raw: Sequence[Any], states: Sequence[str], exact: bool, where: str) -> IntervalDistribution:
    outcomes = []
    for k, triple in enumerate(raw):
        if len(triple) != 3:
            raise SpecParseError("outcome must be [target, lo, hi]", f"{where}.outcomes[{k}]")
        target = str(triple[0])
        if target not in states:
            raise SpecParseError(f"unknown target {target!r}", f"{where}.outcomes[{k}]")
        outcomes.append(
            IntervalOutcome(
                target,
                _probability(triple[1], exact, f"{where}.outcomes[{k}]"),
                _probability(triple[2], exact, f"{where}.outcomes[{k}]"),
            )
        )
    if not outcomes:
        raise SpecParseError("empty outcome list", where)
    return IntervalDistribution(tuple(outcomes))


def _def2_split(raw: Sequence[Any], states: Sequence[str], exact: bool, where: str) -> SplitDistribution:
    bounds, parts = [], []
    for k, group in enumerate(raw or []):
        gwhere = f"{where}.split[{k}]"
        lo = _probability(_require(group, "lo", gwhere), exact, gwhere)
        hi = _probability(_require(group, "hi", gwhere), exact, gwhere)
        shares = []
        for j, pair in enumerate(_require(group, "parts", gwhere)):
            pwhere = f"{gwhere}.parts[{j}]"
            if len(pair) != 2:
                raise SpecParseError("part must be [target, share]", pwhere)
            target = str(pair[0])
            if target not in states:
                raise SpecParseError(f"unknown target {target!r}", pwhere)
            shares.append((target, _probability(pair[1], exact, pwhere)))
        bounds.append(IntervalOutcome(k, lo, hi))
        parts.append(shares)
    if not bounds:
        raise SpecParseError("empty split list", where)
    return SplitDistribution.split(IntervalDistribution(tuple(bounds)), parts)


def _variable_ref(ref: str, current: Optional[str], states: Sequence[str], where: str) -> tuple[Optional[str], str]:
    """'state.var' or 'var' (the current state's variable when current is None)."""
    if "." in ref:
        state, name = ref.split(".", 1)
        if state not in states:
            raise SpecParseError(f"unknown state in {ref!r}", where)
        return state, name
    return current, ref


@dataclass(frozen=True)
class _Rule:
    source: str
    actions: frozenset[Action]
    guard: tuple[tuple[Optional[str], str, int], ...]
    outcomes: tuple[tuple[str, tuple[tuple[str, str, int], ...], Fraction, Fraction], ...]
    split: tuple[tuple[Fraction, Fraction, tuple[tuple[str, tuple[tuple[str, str, int], ...], Fraction], ...]], ...] = ()


class RuleTable:
    """Def3 transitions from a spec file: the first rule whose source, action and guard match wins."""

    def __init__(self, layout: VariableLayout, rules: Sequence[_Rule]):
        self.layout = layout
        self.rules = tuple(rules)

    def _guard_holds(self, cs: CumulativeState, rule: _Rule) -> bool:
        for state, name, value in rule.guard:
            if cs.assignment[self.layout.offset(state or cs.standard, name)] != value:
                return False
        return True

    def _successor(self, cs: CumulativeState, target: str, sets: Sequence[tuple[str, str, int]]) -> CumulativeState:
        return cs.with_values(self.layout, {(s, n): v for s, n, v in sets}).moved_to(target)

    def __call__(self, cs: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        for rule in self.rules:
            if rule.source == cs.standard and action in rule.actions and self._guard_holds(cs, rule):
                if rule.split:
                    bounds = tuple(IntervalOutcome(k, lo, hi) for k, (lo, hi, _) in enumerate(rule.split))
                    return SplitDistribution.split(
                        IntervalDistribution(bounds),
                        [[(self._successor(cs, t, sets), p) for t, sets, p in parts] for _, _, parts in rule.split],
                    )
                outcomes = [
                    IntervalOutcome(self._successor(cs, target, sets), lo, hi)
                    for target, sets, lo, hi in rule.outcomes
                ]
                return IntervalDistribution(merge_duplicate_targets(outcomes))
        return None


def _layout_from(doc: Mapping[str, Any], signature: ScalarSignature, states: tuple[str, ...]) -> VariableLayout:
    raw = (doc.get("variables") or {}).get("invisible", []) or []
    try:
        invisible = tuple(Variable(v["name"], _names(v["values"])) for v in raw)
        return VariableLayout(states, signature.observations, invisible)
    except (KeyError, TypeError, ValueError) as e:
        raise SpecParseError(f"bad variables: {e}", "variables") from e


def _value(layout: VariableLayout, name: str, value: Any, where: str) -> int:
    if name not in layout.variable_position:
        raise SpecParseError(f"unknown variable {name!r}", where)
    try:
        return layout.value_index(name, _token(value))
    except ValueError as e:
        raise SpecParseError(str(e), where) from e


def _build_def3(doc: Mapping[str, Any], signature: ScalarSignature, problems: list[str]) -> WorldDef3:
    exact = bool(doc.get("exact_rationals", False))
    states = tuple(str(s) for s in _require(doc, "states", "spec"))
    initial = str(_require(doc, "initial", "spec"))
    if initial not in states:
        raise SpecParseError(f"initial state {initial!r} is not listed", "initial")
    layout = _layout_from(doc, signature, states)

    values = [0] * layout.size
    for s, assigned in (doc.get("assignment") or {}).items():
        where = f"assignment[{s}]"
        if str(s) not in states:
            raise SpecParseError(f"unknown state {s!r}", where)
        for name, value in (assigned or {}).items():
            index = _value(layout, str(name), value, where)
            values[layout.offset(str(s), str(name))] = index

    rules = []
    for n, entry in enumerate(doc.get("rules", []) or []):
        where = f"rules[{n}]"
        source = str(_require(entry, "from", where))
        if source not in states:
            raise SpecParseError(f"unknown state {source!r}", where)
        guard = []
        for ref, value in (entry.get("when") or {}).items():
            state, name = _variable_ref(str(ref), None, states, where)
            guard.append((state, name, _value(layout, name, value, where)))
        def successor(out: Mapping[str, Any], owhere: str) -> tuple[str, tuple[tuple[str, str, int], ...]]:
            target = str(_require(out, "to", owhere))
            if target not in states:
                raise SpecParseError(f"unknown target {target!r}", owhere)
            sets = []
            for ref, value in (out.get("set") or {}).items():
                state, name = _variable_ref(str(ref), source, states, owhere)
                sets.append((state, name, _value(layout, name, value, owhere)))
            return target, tuple(sets)

        outcomes = []
        split = []
        checked: IntervalDistribution
        if "split" in entry:
            bounds, checked_parts = [], []
            for k, group in enumerate(entry["split"] or []):
                gwhere = f"{where}.split[{k}]"
                lo = _probability(_require(group, "lo", gwhere), exact, gwhere)
                hi = _probability(_require(group, "hi", gwhere), exact, gwhere)
                parts = []
                for j, out in enumerate(_require(group, "parts", gwhere)):
                    pwhere = f"{gwhere}.parts[{j}]"
                    target, sets = successor(out, pwhere)
                    parts.append((target, sets, _probability(_require(out, "p", pwhere), exact, pwhere)))
                split.append((lo, hi, tuple(parts)))
                bounds.append(IntervalOutcome(k, lo, hi))
                checked_parts.append([((t, tuple(sorted(s))), p) for t, s, p in parts])
            if not split:
                raise SpecParseError("empty split list", where)
            checked = SplitDistribution.split(IntervalDistribution(tuple(bounds)), checked_parts)
        else:
            flat = []
            for k, out in enumerate(_require(entry, "outcomes", where)):
                owhere = f"{where}.outcomes[{k}]"
                target, sets = successor(out, owhere)
                lo = _probability(_require(out, "lo", owhere), exact, owhere)
                hi = _probability(_require(out, "hi", owhere), exact, owhere)
                outcomes.append((target, sets, lo, hi))
                flat.append(IntervalOutcome((target, tuple(sorted(sets))), lo, hi))
            if not outcomes:
                raise SpecParseError("empty outcome list", where)
            checked = IntervalDistribution(tuple(flat))
        _check_dist(checked, where, exact, problems)
        actions = frozenset(expand_action(signature, _require(entry, "action", where), where))
        rules.append(_Rule(source, actions, tuple(guard), tuple(outcomes), tuple(split)))

    return WorldDef3(
        signature,
        layout,
        CumulativeState(initial, tuple(values)),
        RuleTable(layout, rules),
        name=str(doc.get("name", "def3")),
    )


class NoiseTable:
    """Static Def4 noise: a descriptor per (state, visible variable), silent when absent."""

    def __init__(self, signature: ScalarSignature, entries: Mapping[tuple[str, int], NoiseDescriptor]):
        self.entries = dict(entries)
        self._silent = [NoiseDescriptor.silent(c.cardinality) for c in signature.observations]

    def __call__(self, cs: CumulativeState, state: Hashable, j: int) -> NoiseDescriptor:
        return self.entries.get((state, j), self._silent[j])


def _build_noise(doc: Mapping[str, Any], base: WorldDef3) -> NoiseTable:
    signature = base.signature
    names = [c.name for c in signature.observations]
    entries: dict[tuple[str, int], NoiseDescriptor] = {}
    for n, entry in enumerate(doc.get("noise", []) or []):
        where = f"noise[{n}]"
        variable = str(_require(entry, "variable", where))
        if variable not in names:
            raise SpecParseError(f"unknown visible variable {variable!r}", where)
        j = names.index(variable)
        coord = signature.observations[j]
        raw = _require(entry, "spectrum", where)
        try:
            if isinstance(raw, Mapping):
                weights = {coord.index(_token(k)): v for k, v in raw.items()}
            else:
                weights = dict(enumerate(raw))
            descriptor = NoiseDescriptor.over(_require(entry, "volume", where), coord.cardinality, weights)
        except (ValueError, TypeError, IndexError) as e:
            raise SpecParseError(str(e), where) from e
        state = str(_require(entry, "state", where))
        targets = base.states if state == WILDCARD else (state,)
        for s in targets:
            if s not in base.layout.state_position:
                raise SpecParseError(f"unknown state {s!r}", where)
            entries[(s, j)] = descriptor
    return NoiseTable(signature, entries)


def check_world_spec(source: str | Path | Mapping[str, Any]) -> SpecCheck:
    """
    Parse and validate a world spec.

    Structural errors raise SpecParseError; distribution violations are collected
    with their locations so every one of them can be reported.
    """
    doc = read_spec_document(source)
    kind = str(doc.get("kind", "def2"))
    if kind not in KINDS:
        raise SpecParseError(f"kind must be one of {KINDS}", "kind")
    problems: list[str] = []
    if kind == "def1":
        from src.world_insight.transforms.determinize import def2_to_def1

        base = read_spec_document(_require(doc, "base", "spec"))
        signature = parse_signature(base)
        seeds = doc.get("seeds") or {}
        world: Any = def2_to_def1(
            _build_def2(base, signature, problems),
            (int(seeds.get("good", 0)), int(seeds.get("bad", 0))),
        )
    else:
        signature = parse_signature(doc)
        if kind == "def2":
            world = _build_def2(doc, signature, problems)
        else:
            world = _build_def3(doc, signature, problems)
            if kind == "def4":
                world = WorldDef4(world, _build_noise(doc, world), name=world.name)
    logger.debug(f"Loaded {kind} world {getattr(world, 'name', '?')} with {len(problems)} problem(s)")
    return SpecCheck(world, problems)


def load_world_spec(source: str | Path | Mapping[str, Any]) -> Any:
    """Load a world, raising SpecValidationError when any constraint is broken."""
    check = check_world_spec(source)
    if not check.ok:
        raise SpecValidationError(check.problems)
    return check.world


def _bound(value: Fraction) -> int | str:
    return int(value * HUNDRED) if is_hundredths(value) else f"{value.numerator}/{value.denominator}"


def _signature_doc(signature: ScalarSignature) -> dict[str, Any]:
    return {
        "actions": [{"name": c.name, "values": list(c.values)} for c in signature.actions],
        "observations": [{"name": c.name, "values": list(c.values)} for c in signature.observations],
        "groups": [
            {
                "name": g.name,
                "pattern": [WILDCARD if p is None else c.values[p] for c, p in zip(signature.actions, g.pattern)],
            }
            for g in signature.groups
        ],
    }


def _written_numbers(dist: IntervalDistribution) -> Iterable[Fraction]:
    if isinstance(dist, SplitDistribution):
        assert dist.source is not None
        for o in dist.source.outcomes:
            yield from (o.lo, o.hi)
        for group in dist.parts:
            yield from (p for _, p in group)
    else:
        for o in dist.outcomes:
            yield from (o.lo, o.hi)


def _exact_needed(dists: Iterable[IntervalDistribution]) -> bool:
    return any(not is_hundredths(v) for d in dists for v in _written_numbers(d))


def _transition_doc(dist: IntervalDistribution) -> dict[str, Any]:
    if isinstance(dist, SplitDistribution):
        assert dist.source is not None
        return {
            "split": [
                {"lo": _bound(o.lo), "hi": _bound(o.hi), "parts": [[str(t), _bound(p)] for t, p in group]}
                for o, group in zip(dist.source.outcomes, dist.parts)
            ]
        }
    return {"outcomes": [[str(o.target), _bound(o.lo), _bound(o.hi)] for o in dist.outcomes]}


def dump_def2(world: WorldDef2) -> dict[str, Any]:
    """A def2 spec document for an explicit world."""
    signature = world.signature
    doc: dict[str, Any] = {"kind": "def2", "name": world.name}
    if _exact_needed(world.transitions.values()):
        doc["exact_rationals"] = True
    doc["signature"] = _signature_doc(signature)
    doc["states"] = [str(s) for s in world.states]
    doc["initial"] = str(world.initial)
    doc["view"] = {
        str(s): [c.values[v] for c, v in zip(signature.observations, world.view[s])] for s in world.states
    }
    doc["transitions"] = [
        {
            "from": str(s),
            "action": [c.values[v] for c, v in zip(signature.actions, a)],
            **_transition_doc(dist),
        }
        for (s, a), dist in world.transitions.items()
    ]
    return doc


def dump_constant_def3(world: WorldDef2) -> dict[str, Any]:
    """
    A def3 spec document whose variables are all constants: each state keeps its
    view in its visible variables and no rule writes them.
    """
    doc = dump_def2(world)
    doc["kind"] = "def3"
    doc["assignment"] = {
        s: {c.name: v for c, v in zip(world.signature.observations, values)} for s, values in doc.pop("view").items()
    }
    doc["rules"] = [_constant_rule(t) for t in doc.pop("transitions")]
    return doc


def _constant_rule(transition: Mapping[str, Any]) -> dict[str, Any]:
    rule = {"from": transition["from"], "action": transition["action"]}
    if "split" in transition:
        rule["split"] = [
            {"lo": g["lo"], "hi": g["hi"], "parts": [{"to": t, "p": p} for t, p in g["parts"]]}
            for g in transition["split"]
        ]
    else:
        rule["outcomes"] = [{"to": target, "lo": lo, "hi": hi} for target, lo, hi in transition["outcomes"]]
    return rule


def write_spec(document: Mapping[str, Any], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(dict(document), f, sort_keys=False, allow_unicode=True)
