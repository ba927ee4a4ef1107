"""
Event DSL.

    event    := ("A" | "B") ":" past "/" future
    past     := op "(" seq ["," int ["," int]] ")" | seq
    op       := ends | begins | contains | recent | mod
    future   := "ε" | "eps" | "within" "(" seq "," int ")" | seq
    seq      := template+
    template := "⟨" part ";" part "⟩"          ("<" and ">" also accepted)
    part     := "*" | item ("," item)*
    item     := name "=" value | value | all(group)=bool | nobody(group)=bool | correct(index)=bool

Examples::

    A: ends(⟨*;reward=1⟩) / ε
    B: mod(⟨*;*⟩, 0, 7) / ε
    A: contains(⟨pickup;*⟩⟨*;color=White⟩) / ⟨*;reward=1⟩

Kind A matches some suffix of the past, kind B the whole past from step 1, so
``begins`` and ``mod`` are only meaningful (and only accepted) for kind B.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import pyparsing as pp

from src.world_insight.errors import EventSemanticError, EventSyntaxError
from src.world_insight.events.automaton import NFA, Automaton, CountingDFA, LazyDFA
from src.world_insight.events.templates import FlagConstraint, StepTemplate
from src.world_insight.world.signature import Coordinate, ScalarSignature

PAST_OPS = ("ends", "begins", "contains", "recent", "mod")
ORIGIN_OPS = ("begins", "mod")
ARITY = {"ends": 0, "begins": 0, "contains": 0, "recent": 1, "mod": 2}


def _grammar() -> tuple[pp.ParserElement, pp.ParserElement, pp.ParserElement]:
    lp, rp, comma = pp.Suppress("("), pp.Suppress(")"), pp.Suppress(",")
    langle = pp.Suppress(pp.one_of("⟨ <"))
    rangle = pp.Suppress(pp.one_of("⟩ >"))
    name = pp.Word(pp.alphas + "_", pp.alphanums + "_-")
    value = pp.Word(pp.alphanums + "_-+.")
    boolean = pp.one_of("true false", as_keyword=True)
    integer = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))

    flag = pp.Group(
        pp.one_of("all nobody correct", as_keyword=True)("flag")
        + lp
        + value("key")
        + rp
        + pp.Suppress("=")
        + boolean("value")
    )
    named = pp.Group(name("name") + pp.Suppress("=") + value("value"))
    bare = pp.Group(value("bare"))
    item = flag | named | bare
    # names go on Groups only: a name on a MatchFirst of Groups nests the match one level deeper
    part = pp.Group(pp.Literal("*")("wild") | item + pp.ZeroOrMore(comma + item))
    template = pp.Group(langle + part("action") + pp.Suppress(";") + part("observation") + rangle)
    seq = pp.Group(pp.OneOrMore(template))

    past_op = (
        pp.one_of(" ".join(PAST_OPS), as_keyword=True)("op")
        + lp
        + seq("seq")
        + pp.Optional(comma + integer("a1") + pp.Optional(comma + integer("a2")))
        + rp
    )
    past = pp.Group(past_op | seq("seq"))
    within = pp.Keyword("within")("op") + lp + seq("seq") + comma + integer("a1") + rp
    epsilon = pp.one_of("ε eps", as_keyword=False)("eps")
    future = pp.Group(epsilon | within | seq("seq"))
    event = (
        pp.one_of("A B", as_keyword=True)("kind")
        + pp.Suppress(":")
        + past("past")
        + pp.Suppress("/")
        + future("future")
        + pp.StringEnd()
    )
    result = (flag | named | bare) + pp.StringEnd()
    single = template + pp.StringEnd()
    return event, result, single


EVENT_GRAMMAR, RESULT_GRAMMAR, TEMPLATE_GRAMMAR = _grammar()


def _parse(grammar: pp.ParserElement, text: str) -> pp.ParseResults:
    try:
        return grammar.parse_string(text, parse_all=True)
    except pp.ParseException as e:
        raise EventSyntaxError(str(e.msg), e.loc, text) from None


def _coordinate_for(coords: Sequence[Coordinate], token: str, kind: str) -> int:
    holders = [i for i, c in enumerate(coords) if token in c.values]
    if not holders:
        raise EventSemanticError(f"no {kind} coordinate has a value {token!r}")
    if len(holders) > 1:
        names = ", ".join(coords[i].name for i in holders)
        raise EventSemanticError(f"value {token!r} is ambiguous between {kind} coordinates {names}")
    return holders[0]


def _flag(item: pp.ParseResults, signature: ScalarSignature) -> FlagConstraint:
    kind, key, value = item["flag"], item["key"], item["value"] == "true"
    if kind == "correct":
        try:
            position = int(key)
        except ValueError:
            raise EventSemanticError(f"correct(...) takes an action index, got {key!r}") from None
        if not 0 <= position < len(signature.action_space):
            raise EventSemanticError(f"action index {position} outside 0..{len(signature.action_space) - 1}")
        return FlagConstraint(kind, position, value)
    try:
        return FlagConstraint(kind, signature.group_index(key), value)
    except ValueError:
        raise EventSemanticError(f"unknown move group {key!r}") from None


def _part(
    tokens: pp.ParseResults, coords: Sequence[Coordinate], kind: str, signature: ScalarSignature
) -> tuple[tuple[Optional[int], ...], list[FlagConstraint]]:
    values: list[Optional[int]] = [None] * len(coords)
    flags: list[FlagConstraint] = []
    if "wild" in tokens:
        return tuple(values), flags
    names = [c.name for c in coords]
    for item in tokens:
        if "flag" in item:
            flags.append(_flag(item, signature))
            continue
        if "name" in item:
            if item["name"] not in names:
                raise EventSemanticError(f"unknown {kind} coordinate {item['name']!r}")
            position = names.index(item["name"])
            token = item["value"]
        else:
            token = item["bare"]
            position = _coordinate_for(coords, token, kind)
        if token not in coords[position].values:
            raise EventSemanticError(f"{coords[position].name} has no value {token!r}")
        index = coords[position].values.index(token)
        if values[position] is not None and values[position] != index:
            raise EventSemanticError(f"conflicting values for {coords[position].name}")
        values[position] = index
    return tuple(values), flags


def _template(tokens: pp.ParseResults, signature: ScalarSignature) -> StepTemplate:
    action, action_flags = _part(tokens["action"], signature.actions, "action", signature)
    observation, obs_flags = _part(tokens["observation"], signature.observations, "observation", signature)
    return StepTemplate(action, observation, tuple(action_flags + obs_flags))


def parse_template(text: str, signature: ScalarSignature) -> StepTemplate:
    """A single ``⟨...;...⟩`` template."""
    return _template(_parse(TEMPLATE_GRAMMAR, text.strip())[0], signature)


@dataclass(frozen=True)
class ResultPredicate:
    """``x_i = constant`` on the present step: an observation coordinate or a correctness flag."""

    observation: Optional[int] = None
    value: Optional[int] = None
    flag: Optional[FlagConstraint] = None

    def evaluate(self, letter) -> bool:
        if self.flag is not None:
            return self.flag.holds(letter)
        return letter.observation[self.observation] == self.value

    def render(self, signature: ScalarSignature) -> str:
        if self.flag is not None:
            return self.flag.render(signature)
        coord = signature.observations[self.observation]
        return f"{coord.name}={coord.values[self.value]}"


def parse_result(text: str, signature: ScalarSignature) -> ResultPredicate:
    """``color=White``, a bare value such as ``White``, or a flag such as ``nobody(pickup)=false``."""
    item = _parse(RESULT_GRAMMAR, text.strip())[0]
    if "flag" in item:
        return ResultPredicate(flag=_flag(item, signature))
    names = [c.name for c in signature.observations]
    if "name" in item:
        if item["name"] not in names:
            raise EventSemanticError(f"unknown observation coordinate {item['name']!r}")
        position, token = names.index(item["name"]), item["value"]
    else:
        token = item["bare"]
        position = _coordinate_for(signature.observations, token, "observation")
    coord = signature.observations[position]
    if token not in coord.values:
        raise EventSemanticError(f"{coord.name} has no value {token!r}")
    return ResultPredicate(observation=position, value=coord.values.index(token))


@dataclass(frozen=True)
class PastExpr:
    op: str
    seq: tuple[StepTemplate, ...]
    args: tuple[int, ...] = ()

    def language(self) -> NFA:
        """L1 as an NFA (mod is handled by the counting automaton instead)."""
        literal = NFA.literal(self.seq)
        if self.op == "seq":
            return literal
        if self.op in ("ends", "mod"):
            return literal.with_any_prefix()
        if self.op == "begins":
            return literal.with_any_suffix()
        if self.op == "contains":
            return literal.with_any_prefix().with_any_suffix()
        if self.op == "recent":
            return literal.with_any_prefix().with_bounded_suffix(self.args[0])
        raise ValueError(self.op)


@dataclass(frozen=True)
class FutureExpr:
    op: str
    seq: tuple[StepTemplate, ...] = ()
    args: tuple[int, ...] = ()

    def language(self) -> NFA:
        if self.op == "eps":
            return NFA.empty_word()
        literal = NFA.literal(self.seq)
        if self.op == "within":
            return literal.with_bounded_prefix(self.args[0])
        return literal

    @property
    def lookahead(self) -> int:
        """Longest future a match can need."""
        return len(self.seq) + (self.args[0] if self.op == "within" else 0)


@dataclass(frozen=True, eq=False)
class EventPattern:
    """A parsed experiment: kind, past and future expressions, and their automata."""

    kind: str
    past: PastExpr
    future: FutureExpr
    signature: ScalarSignature
    source_text: str = ""
    name: str = ""

    @cached_property
    def past_automaton(self) -> Automaton:
        """Kind A: Σ*·L1 run over the past window. Kind B: L1 run from step 1."""
        if self.past.op == "mod":
            residue, modulus = self.past.args
            return CountingDFA(LazyDFA(self.past.language()), residue, modulus)
        nfa = self.past.language()
        return LazyDFA(nfa.with_any_prefix() if self.kind == "A" else nfa)

    @cached_property
    def future_automaton(self) -> LazyDFA:
        return LazyDFA(self.future.language())

    @property
    def label(self) -> str:
        return self.name or pretty(self)

    @property
    def lookahead(self) -> int:
        return self.future.lookahead


def parse_event(text: str, signature: ScalarSignature, name: str = "") -> EventPattern:
    """Parse and check an event; raises EventSyntaxError or EventSemanticError."""
    tokens = _parse(EVENT_GRAMMAR, text.strip())
    kind = tokens["kind"]
    past_tokens = tokens["past"]
    op = past_tokens.get("op", "seq")
    args = tuple(past_tokens[k] for k in ("a1", "a2") if k in past_tokens)
    if op != "seq" and len(args) != ARITY[op]:
        raise EventSemanticError(f"{op}(...) takes {ARITY[op]} integer argument(s), got {len(args)}")
    if kind == "A" and op in ORIGIN_OPS:
        raise EventSemanticError(f"{op}(...) needs the whole history: use a kind B event")
    if op == "mod" and not 0 <= args[0] < args[1]:
        raise EventSemanticError(f"mod(..., {args[0]}, {args[1]}) needs 0 <= residue < modulus")
    past = PastExpr(op, tuple(_template(t, signature) for t in past_tokens["seq"]), args)

    future_tokens = tokens["future"]
    if "eps" in future_tokens:
        future = FutureExpr("eps")
    else:
        fop = future_tokens.get("op", "seq")
        fargs = (future_tokens["a1"],) if "a1" in future_tokens else ()
        future = FutureExpr(fop, tuple(_template(t, signature) for t in future_tokens["seq"]), fargs)
    return EventPattern(kind, past, future, signature, text.strip(), name)


def _render_seq(seq: Sequence[StepTemplate], signature: ScalarSignature) -> str:
    return "".join(t.render(signature) for t in seq)


def pretty(event: EventPattern) -> str:
    """Canonical DSL text; parsing it gives an event accepting the same local histories."""
    sig = event.signature
    past = _render_seq(event.past.seq, sig)
    if event.past.op != "seq":
        past = f"{event.past.op}({', '.join([past] + [str(a) for a in event.past.args])})"
    if event.future.op == "eps":
        future = "ε"
    elif event.future.op == "within":
        future = f"within({_render_seq(event.future.seq, sig)}, {event.future.args[0]})"
    else:
        future = _render_seq(event.future.seq, sig)
    return f"{event.kind}: {past} / {future}"
