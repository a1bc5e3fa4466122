"""JSON model files: variables with domains, constraints by kind tag.

Scopes reference variables by name.  A malformed document raises
ParseError (with line/column when the JSON itself is broken); a
well-formed document with unknown names, bad arities, or a
nondeterministic automaton raises SemanticError.  save then load gives
back a structurally equal model, automata included.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .automaton import Dfa
from .errors import ParseError, SemanticError
from .model import (
    BinaryAdjacency,
    Constraint,
    Csp,
    FixedAssignment,
    InverseChanneling,
    LessThan,
    NotEqual,
    Regular,
    Table,
    Variable,
)


def _require(obj: dict, key: str, kind: type, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"{where}: field {key!r} must be a number")
    elif not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ParseError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _int_list(obj: dict, key: str, where: str) -> list[int]:
    values = _require(obj, key, list, where)
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError(f"{where}: {key!r} must hold integers")
    return values


def _dfa_to_dict(d: Dfa) -> dict:
    return {
        "states": d.num_states,
        "start": d.start,
        "finals": sorted(d.finals),
        "word_length": d.word_length,
        "alphabet": list(d.alphabet),
        "transitions": sorted(
            [src, sym, dst] for (src, sym), dst in d.transitions.items()
        ),
    }


def _dfa_from_dict(obj: dict, where: str) -> Dfa:
    num_states = _require(obj, "states", int, where)
    start = _require(obj, "start", int, where)
    finals = _int_list(obj, "finals", where)
    word_length = _require(obj, "word_length", int, where)
    alphabet = _int_list(obj, "alphabet", where)
    triples = _require(obj, "transitions", list, where)
    transitions: dict[tuple[int, int], int] = {}
    for triple in triples:
        if (
            not isinstance(triple, list)
            or len(triple) != 3
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in triple)
        ):
            raise ParseError(f"{where}: transitions must be [from, symbol, to] triples")
        src, sym, dst = triple
        if (src, sym) in transitions:
            raise SemanticError(
                f"{where}: nondeterministic automaton, duplicate move "
                f"from state {src} on symbol {sym}"
            )
        transitions[(src, sym)] = dst
    try:
        return Dfa(num_states, transitions, start, finals, word_length, alphabet)
    except ValueError as exc:
        raise SemanticError(f"{where}: {exc}") from exc


def _constraint_to_dict(c: Constraint, names: list[str]) -> dict:
    scope = [names[v] for v in c.scope]
    if isinstance(c, Table):
        return {"kind": "table", "scope": scope, "tuples": [list(t) for t in c.tuples]}
    if isinstance(c, Regular):
        return {"kind": "regular", "scope": scope, "dfa": _dfa_to_dict(c.dfa)}
    if isinstance(c, BinaryAdjacency):
        return {
            "kind": "binary_adjacency",
            "scope": scope,
            "modulus": c.modulus,
            "diffs": list(c.diffs),
        }
    if isinstance(c, LessThan):
        return {"kind": "less_than", "scope": scope}
    if isinstance(c, NotEqual):
        return {"kind": "not_equal", "scope": scope}
    if isinstance(c, FixedAssignment):
        return {"kind": "fixed_assignment", "scope": scope, "value": c.value}
    if isinstance(c, InverseChanneling):
        return {"kind": "inverse_channeling", "scope": scope}
    raise TypeError(f"cannot serialize constraint {type(c).__name__}")


def _constraint_from_dict(obj: dict, index_of: dict[str, int], where: str) -> Constraint:
    kind = _require(obj, "kind", str, where)
    scope_names = _require(obj, "scope", list, where)
    scope: list[int] = []
    for name in scope_names:
        if not isinstance(name, str):
            raise ParseError(f"{where}: scope entries must be variable names")
        if name not in index_of:
            raise SemanticError(f"{where}: unknown variable {name!r}")
        scope.append(index_of[name])
    scope_t = tuple(scope)
    if kind == "table":
        rows = _require(obj, "tuples", list, where)
        tuples = []
        for row in rows:
            if not isinstance(row, list) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in row
            ):
                raise ParseError(f"{where}: table rows must be integer lists")
            tuples.append(tuple(row))
        return Table(scope=scope_t, tuples=tuple(tuples))
    if kind == "regular":
        dfa = _dfa_from_dict(_require(obj, "dfa", dict, where), where)
        return Regular(scope=scope_t, dfa=dfa)
    if kind == "binary_adjacency":
        return BinaryAdjacency(
            scope=scope_t,
            modulus=_require(obj, "modulus", int, where),
            diffs=tuple(_int_list(obj, "diffs", where)),
        )
    if kind == "less_than":
        return LessThan(scope=scope_t)
    if kind == "not_equal":
        return NotEqual(scope=scope_t)
    if kind == "fixed_assignment":
        return FixedAssignment(scope=scope_t, value=_require(obj, "value", int, where))
    if kind == "inverse_channeling":
        return InverseChanneling(scope=scope_t)
    raise ParseError(f"{where}: unknown constraint kind {kind!r}")


def model_to_dict(csp: Csp) -> dict:
    names = [v.name for v in csp.variables]
    return {
        "variables": [
            {"name": v.name, "domain": list(dom)}
            for v, dom in zip(csp.variables, csp.domains)
        ],
        "constraints": [_constraint_to_dict(c, names) for c in csp.constraints],
    }


def model_from_dict(doc: Any) -> Csp:
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    var_objs = _require(doc, "variables", list, "model")
    variables = []
    domains = []
    index_of: dict[str, int] = {}
    for i, obj in enumerate(var_objs):
        if not isinstance(obj, dict):
            raise ParseError(f"variable {i}: must be an object")
        name = _require(obj, "name", str, f"variable {i}")
        domain = _int_list(obj, "domain", f"variable {i}")
        if name in index_of:
            raise SemanticError(f"duplicate variable name {name!r}")
        index_of[name] = i
        variables.append(Variable(i, name))
        domains.append(tuple(domain))
    con_objs = _require(doc, "constraints", list, "model")
    constraints = []
    for j, obj in enumerate(con_objs):
        if not isinstance(obj, dict):
            raise ParseError(f"constraint {j}: must be an object")
        constraints.append(_constraint_from_dict(obj, index_of, f"constraint {j}"))
    try:
        return Csp(tuple(variables), tuple(domains), tuple(constraints))
    except ValueError as exc:
        raise SemanticError(str(exc)) from exc


def save_model(csp: Csp, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(csp), indent=2) + "\n")


def load_model(path: str | Path) -> Csp:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return model_from_dict(doc)
