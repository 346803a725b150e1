"""Reader, validator and printer for the typed-STRIPS PDDL subset.

Accepted: ``:strips``, ``:typing`` and ``:action-costs``; positive
conjunctive preconditions and goals; add/delete effects; action costs through
``(increase (total-cost) k)`` where ``k`` is a non-negative integer or a
static function term fixed in the problem's ``:init``. Anything else raises a
``PddlError`` that says which feature is unsupported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":action-costs")
ROOT_TYPE = "object"


class PddlError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


# -- s-expressions ---------------------------------------------------------


@dataclass
class Sym:
    text: str
    line: int
    column: int

    @property
    def key(self) -> str:
        return self.text.lower()


@dataclass
class SList:
    items: list
    line: int
    column: int

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def read_sexpr(text: str) -> SList:
    """Parse ``text`` into a single top-level list; comments are dropped."""
    stack: list[SList] = []
    top: SList | None = None
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok[0].isspace() or tok[0] == ";":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = m.start() + tok.rindex("\n") + 1
            continue
        if tok == "(":
            node = SList([], line, col)
            if stack:
                stack[-1].items.append(node)
            elif top is not None:
                raise PddlError("unexpected content after the top-level expression", line, col)
            else:
                top = node
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise PddlError("unbalanced ')' without matching '('", line, col)
            stack.pop()
        else:
            if not stack:
                raise PddlError(f"unexpected token {tok!r} outside parentheses", line, col)
            stack[-1].items.append(Sym(tok, line, col))
    if stack:
        opened = stack[-1]
        raise PddlError(
            f"unbalanced '(' opened at line {opened.line}, column {opened.column} is never closed",
            opened.line, opened.column,
        )
    if top is None:
        raise PddlError("empty input", 1, 1)
    return top


# -- AST --------------------------------------------------------------------

TypedList = tuple  # tuple of (name, type) pairs


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self):
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True)
class CostTerm:
    """Action cost: either an integer literal or a static function term."""

    value: int | None = None
    function: Atom | None = None


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: TypedList
    precondition: tuple[Atom, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]
    cost: CostTerm | None = None


@dataclass(frozen=True)
class DomainAst:
    name: str
    requirements: tuple[str, ...]
    types: tuple[tuple[str, str], ...]
    constants: TypedList
    predicates: tuple[tuple[str, TypedList], ...]
    functions: tuple[tuple[str, TypedList], ...]
    actions: tuple[ActionSchema, ...]

    @property
    def uses_costs(self) -> bool:
        return ":action-costs" in self.requirements

    def parent_map(self) -> dict[str, str]:
        return dict(self.types)

    def predicate_map(self) -> dict[str, TypedList]:
        return dict(self.predicates)

    def function_map(self) -> dict[str, TypedList]:
        return dict(self.functions)


@dataclass(frozen=True)
class ProblemAst:
    name: str
    domain_name: str
    objects: TypedList
    init: tuple[Atom, ...]
    numeric_init: tuple[tuple[Atom, int], ...] = ()
    goal: tuple[Atom, ...] = ()
    metric: bool = False

    def object_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, t in self.objects:
            counts[t] = counts.get(t, 0) + 1
        return counts


# -- helpers ---------------------------------------------------------------


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise PddlError(f"expected a parenthesized {what}", node.line, node.column)
    return node


def _expect_sym(node, what: str) -> Sym:
    if not isinstance(node, Sym):
        raise PddlError(f"expected {what}", node.line, node.column)
    return node


def _typed_list(items, allow_types: bool, where) -> list[tuple[str, str, Sym]]:
    out: list[tuple[str, str, Sym]] = []
    pending: list[Sym] = []
    i = 0
    while i < len(items):
        node = items[i]
        if isinstance(node, SList):
            raise PddlError("unexpected list inside a typed list", node.line, node.column)
        if node.text == "-":
            if not allow_types:
                raise PddlError("types used without the :typing requirement", node.line, node.column)
            if i + 1 >= len(items):
                raise PddlError("missing type after '-'", node.line, node.column)
            t = items[i + 1]
            if isinstance(t, SList):
                head = t.items[0].key if t.items and isinstance(t.items[0], Sym) else ""
                feature = "either-types" if head == "either" else "compound types"
                raise PddlError(f"unsupported feature: {feature}", t.line, t.column)
            if not pending:
                raise PddlError("type annotation without names", node.line, node.column)
            out.extend((s.text, t.text, s) for s in pending)
            pending = []
            i += 2
            continue
        pending.append(node)
        i += 1
    out.extend((s.text, ROOT_TYPE, s) for s in pending)
    return out


def _atom(node, where: str) -> Atom:
    lst = _expect_list(node, f"atom in {where}")
    if not lst.items:
        raise PddlError(f"empty atom in {where}", lst.line, lst.column)
    head = lst.items[0]
    if isinstance(head, SList):
        raise PddlError(f"malformed atom in {where}", lst.line, lst.column)
    if head.key in ("not", "or", "imply", "forall", "exists", "when", "="):
        feature = {
            "not": "negative literals", "or": "disjunction", "imply": "implication",
            "forall": "universal quantification", "exists": "existential quantification",
            "when": "conditional effects", "=": "equality",
        }[head.key]
        raise PddlError(f"unsupported feature: {feature} in {where}", head.line, head.column)
    args = []
    for a in lst.items[1:]:
        args.append(_expect_sym(a, "an argument name").text)
    return Atom(head.text, tuple(args))


def _conjunction(node, where: str) -> list[Atom]:
    lst = _expect_list(node, where)
    if not lst.items:
        return []
    head = lst.items[0]
    if isinstance(head, Sym) and head.key == "and":
        atoms: list[Atom] = []
        for sub in lst.items[1:]:
            atoms.extend(_conjunction(sub, where))
        return atoms
    return [_atom(lst, where)]


def _pos(node):
    return node.line, node.column


# -- domain ----------------------------------------------------------------


def _header(root: SList, kind: str) -> tuple[str, list]:
    items = root.items
    if not items or not isinstance(items[0], Sym) or items[0].key != "define":
        raise PddlError("expected (define ...)", root.line, root.column)
    if len(items) < 2:
        raise PddlError(f"missing ({kind} NAME)", root.line, root.column)
    head = _expect_list(items[1], f"({kind} NAME)")
    if len(head) != 2 or not isinstance(head[0], Sym) or head[0].key != kind:
        raise PddlError(f"expected ({kind} NAME)", head.line, head.column)
    return _expect_sym(head[1], f"{kind} name").text, items[2:]


def parse_domain(text: str) -> DomainAst:
    root = read_sexpr(text)
    name, sections = _header(root, "domain")
    requirements: list[str] = []
    types: dict[str, str] = {}
    type_order: list[str] = []
    constants: list[tuple[str, str, Sym]] = []
    predicates: dict[str, TypedList] = {}
    functions: dict[str, TypedList] = {}
    raw_actions: list[SList] = []

    for sec in sections:
        sec = _expect_list(sec, "domain section")
        if not sec.items or not isinstance(sec[0], Sym):
            raise PddlError("malformed domain section", sec.line, sec.column)
        key = sec[0].key
        body = sec.items[1:]
        if key == ":requirements":
            for r in body:
                r = _expect_sym(r, "a requirement flag")
                if r.key not in SUPPORTED_REQUIREMENTS:
                    raise PddlError(f"unknown or unsupported requirement {r.text}", r.line, r.column)
                requirements.append(r.key)
        elif key == ":types":
            for child, parent, sym in _typed_list(body, True, sec):
                if child == ROOT_TYPE:
                    continue
                if child in types:
                    raise PddlError(f"type {child} declared twice", *_pos(sym))
                types[child] = parent
                type_order.append(child)
            for parent in list(types.values()):
                if parent != ROOT_TYPE and parent not in types:
                    types[parent] = ROOT_TYPE
                    type_order.append(parent)
        elif key == ":constants":
            constants.extend(_typed_list(body, ":typing" in requirements, sec))
        elif key == ":predicates":
            for p in body:
                p = _expect_list(p, "predicate declaration")
                pname = _expect_sym(p[0], "predicate name")
                if pname.text in predicates:
                    raise PddlError(f"predicate {pname.text} declared twice", *_pos(pname))
                params = _typed_list(p.items[1:], ":typing" in requirements, p)
                predicates[pname.text] = tuple((v, t) for v, t, _ in params)
        elif key == ":functions":
            i = 0
            while i < len(body):
                f = _expect_list(body[i], "function declaration")
                fname = _expect_sym(f[0], "function name")
                params = _typed_list(f.items[1:], ":typing" in requirements, f)
                functions[fname.text] = tuple((v, t) for v, t, _ in params)
                i += 1
                if i + 1 < len(body) and isinstance(body[i], Sym) and body[i].text == "-":
                    rtype = _expect_sym(body[i + 1], "function type")
                    if rtype.key != "number":
                        raise PddlError("unsupported feature: object fluents", *_pos(rtype))
                    i += 2
        elif key == ":action":
            raw_actions.append(sec)
        else:
            raise PddlError(f"unsupported feature: section {sec[0].text}", *_pos(sec[0]))

    declared = set(types) | {ROOT_TYPE}

    def check_type(t: str, sym):
        if t not in declared:
            raise PddlError(f"undeclared type {t}", *_pos(sym))

    for _, t, sym in constants:
        check_type(t, sym)
    for pname, params in predicates.items():
        for _, t in params:
            if t not in declared:
                raise PddlError(f"undeclared type {t} in predicate {pname}", root.line, root.column)
    const_names = {c for c, _, _ in constants}
    actions = tuple(
        _parse_action(sec, requirements, predicates, functions, const_names, check_type)
        for sec in raw_actions
    )
    names = [a.name for a in actions]
    if len(set(names)) != len(names):
        raise PddlError("duplicate action names", root.line, root.column)
    return DomainAst(
        name=name,
        requirements=tuple(requirements),
        types=tuple((t, types[t]) for t in type_order),
        constants=tuple((c, t) for c, t, _ in constants),
        predicates=tuple(predicates.items()),
        functions=tuple(functions.items()),
        actions=actions,
    )


def _parse_action(sec, requirements, predicates, functions, const_names, check_type) -> ActionSchema:
    if len(sec) < 2:
        raise PddlError("action without a name", sec.line, sec.column)
    name = _expect_sym(sec[1], "action name").text
    fields: dict[str, object] = {}
    i = 2
    while i < len(sec):
        k = _expect_sym(sec[i], "an action keyword")
        if k.key not in (":parameters", ":precondition", ":effect"):
            raise PddlError(f"unsupported action keyword {k.text}", *_pos(k))
        if i + 1 >= len(sec):
            raise PddlError(f"missing value for {k.text}", *_pos(k))
        fields[k.key] = sec[i + 1]
        i += 2
    params: list[tuple[str, str]] = []
    if ":parameters" in fields:
        plist = _expect_list(fields[":parameters"], "parameter list")
        for v, t, sym in _typed_list(plist.items, ":typing" in requirements, plist):
            if not v.startswith("?"):
                raise PddlError(f"parameter {v} must start with '?'", *_pos(sym))
            check_type(t, sym)
            params.append((v, t))
    var_names = {v for v, _ in params}
    if len(var_names) != len(params):
        raise PddlError(f"duplicate parameter in action {name}", sec.line, sec.column)

    def check_atom(atom: Atom, node, table=predicates, what="predicate"):
        if atom.predicate not in table:
            raise PddlError(f"undeclared {what} {atom.predicate} in action {name}", *_pos(node))
        if len(table[atom.predicate]) != len(atom.args):
            raise PddlError(
                f"arity mismatch for {atom.predicate} in action {name}: expected "
                f"{len(table[atom.predicate])}, got {len(atom.args)}", *_pos(node),
            )
        for a in atom.args:
            if a.startswith("?") and a not in var_names:
                raise PddlError(f"unbound variable {a} in action {name}", *_pos(node))
            if not a.startswith("?") and a not in const_names:
                raise PddlError(f"undeclared constant {a} in action {name}", *_pos(node))

    pre: list[Atom] = []
    if ":precondition" in fields:
        node = fields[":precondition"]
        pre = _conjunction(node, f"precondition of {name}")
        for a in pre:
            check_atom(a, node)
    add: list[Atom] = []
    delete: list[Atom] = []
    cost = None
    if ":effect" in fields:
        cost = _effects(fields[":effect"], name, add, delete, requirements, functions, check_atom)
    return ActionSchema(name, tuple(params), tuple(pre), tuple(add), tuple(delete), cost)


def _effects(node, name, add, delete, requirements, functions, check_atom):
    lst = _expect_list(node, f"effect of {name}")
    if not lst.items:
        return None
    head = lst.items[0]
    if isinstance(head, Sym) and head.key == "and":
        cost = None
        for sub in lst.items[1:]:
            c = _effects(sub, name, add, delete, requirements, functions, check_atom)
            if c is not None:
                if cost is not None:
                    raise PddlError(f"action {name} increases total-cost twice", sub.line, sub.column)
                cost = c
        return cost
    if isinstance(head, Sym) and head.key == "not":
        if len(lst) != 2:
            raise PddlError("malformed negative effect", lst.line, lst.column)
        atom = _atom(lst[1], f"effect of {name}")
        check_atom(atom, lst)
        delete.append(atom)
        return None
    if isinstance(head, Sym) and head.key == "increase":
        if ":action-costs" not in requirements:
            raise PddlError("increase effect without :action-costs", *_pos(head))
        if len(lst) != 3:
            raise PddlError("malformed increase effect", lst.line, lst.column)
        target = _atom(lst[1], "increase target")
        if target.predicate != "total-cost" or target.args:
            raise PddlError("unsupported feature: numeric fluents other than total-cost", *_pos(lst))
        amount = lst[2]
        if isinstance(amount, Sym):
            try:
                value = int(amount.text)
            except ValueError:
                raise PddlError(f"action cost must be a non-negative integer, got {amount.text}", *_pos(amount)) from None
            if value < 0:
                raise PddlError(f"action cost must be non-negative, got {value}", *_pos(amount))
            return CostTerm(value=value)
        term = _atom(amount, "cost term")
        check_atom(term, amount, functions, "function")
        return CostTerm(function=term)
    if isinstance(head, Sym) and head.key in ("forall", "when"):
        feature = "conditional effects" if head.key == "when" else "universal effects"
        raise PddlError(f"unsupported feature: {feature} in action {name}", *_pos(head))
    atom = _atom(lst, f"effect of {name}")
    check_atom(atom, lst)
    add.append(atom)
    return None


# -- problem ---------------------------------------------------------------


def parse_problem(text: str, domain: DomainAst) -> ProblemAst:
    root = read_sexpr(text)
    name, sections = _header(root, "problem")
    domain_name = None
    objects: list[tuple[str, str, Sym]] = []
    raw_init = None
    raw_goal = None
    metric = False
    typing = ":typing" in domain.requirements
    for sec in sections:
        sec = _expect_list(sec, "problem section")
        if not sec.items or not isinstance(sec[0], Sym):
            raise PddlError("malformed problem section", sec.line, sec.column)
        key = sec[0].key
        if key == ":domain":
            sym = _expect_sym(sec[1], "domain name")
            if sym.text != domain.name:
                raise PddlError(f"problem is for domain {sym.text}, not {domain.name}", *_pos(sym))
            domain_name = sym.text
        elif key == ":requirements":
            for r in sec.items[1:]:
                r = _expect_sym(r, "a requirement flag")
                if r.key not in SUPPORTED_REQUIREMENTS:
                    raise PddlError(f"unknown or unsupported requirement {r.text}", *_pos(r))
        elif key == ":objects":
            objects.extend(_typed_list(sec.items[1:], typing, sec))
        elif key == ":init":
            raw_init = sec
        elif key == ":goal":
            if len(sec) != 2:
                raise PddlError("expected exactly one goal formula", sec.line, sec.column)
            raw_goal = sec[1]
        elif key == ":metric":
            body = [x for x in sec.items[1:]]
            if (len(body) != 2 or not isinstance(body[0], Sym) or body[0].key != "minimize"
                    or not isinstance(body[1], SList) or len(body[1]) != 1
                    or not isinstance(body[1][0], Sym) or body[1][0].key != "total-cost"):
                raise PddlError("unsupported metric; only (minimize (total-cost))", sec.line, sec.column)
            metric = True
        else:
            raise PddlError(f"unsupported feature: section {sec[0].text}", *_pos(sec[0]))
    if domain_name is None:
        raise PddlError("problem has no (:domain ...) section", root.line, root.column)

    declared_types = {t for t, _ in domain.types} | {ROOT_TYPE}
    known: dict[str, str] = dict(domain.constants)
    for obj, t, sym in objects:
        if t not in declared_types:
            raise PddlError(f"undeclared type {t} for object {obj}", *_pos(sym))
        if obj in known:
            raise PddlError(f"object {obj} declared twice", *_pos(sym))
        known[obj] = t
    preds = domain.predicate_map()
    funcs = domain.function_map()

    def check(atom: Atom, node, table, what):
        if atom.predicate not in table:
            raise PddlError(f"undeclared {what} {atom.predicate}", *_pos(node))
        if len(table[atom.predicate]) != len(atom.args):
            raise PddlError(f"arity mismatch for {atom.predicate}", *_pos(node))
        for a in atom.args:
            if a not in known:
                raise PddlError(f"undeclared object {a}", *_pos(node))

    init: list[Atom] = []
    numeric: list[tuple[Atom, int]] = []
    if raw_init is not None:
        for node in raw_init.items[1:]:
            lst = _expect_list(node, "initial fact")
            if lst.items and isinstance(lst[0], Sym) and lst[0].key == "=":
                if len(lst) != 3:
                    raise PddlError("malformed numeric initialization", *_pos(lst))
                fterm = _atom(lst[1], "numeric initialization")
                check(fterm, lst, funcs, "function")
                val = _expect_sym(lst[2], "a number")
                try:
                    value = int(val.text)
                except ValueError:
                    raise PddlError(f"expected an integer, got {val.text}", *_pos(val)) from None
                if value < 0:
                    raise PddlError("numeric values must be non-negative", *_pos(val))
                numeric.append((fterm, value))
                continue
            atom = _atom(lst, "initial state")
            check(atom, lst, preds, "predicate")
            init.append(atom)
    goal: list[Atom] = []
    if raw_goal is not None:
        goal = _conjunction(raw_goal, "goal")
        for a in goal:
            check(a, raw_goal, preds, "predicate")
    return ProblemAst(
        name=name,
        domain_name=domain_name,
        objects=tuple((o, t) for o, t, _ in objects),
        init=tuple(init),
        numeric_init=tuple(numeric),
        goal=tuple(goal),
        metric=metric,
    )


# -- printing ----------------------------------------------------------------


def _fmt_typed(pairs, typing: bool) -> str:
    if not typing:
        return " ".join(n for n, _ in pairs)
    return " ".join(f"{n} - {t}" for n, t in pairs)


def _fmt_conj(atoms, indent: str) -> str:
    if not atoms:
        return "()"
    if len(atoms) == 1:
        return str(atoms[0])
    return "(and " + (f"\n{indent}     ").join(str(a) for a in atoms) + ")"


def print_domain(d: DomainAst) -> str:
    typing = ":typing" in d.requirements
    out = [f"(define (domain {d.name})"]
    if d.requirements:
        out.append(f"  (:requirements {' '.join(d.requirements)})")
    if d.types:
        out.append(f"  (:types {_fmt_typed(d.types, True)})")
    if d.constants:
        out.append(f"  (:constants {_fmt_typed(d.constants, typing)})")
    out.append("  (:predicates")
    for name, params in d.predicates:
        inner = _fmt_typed(params, typing)
        out.append(f"    ({name}{' ' + inner if inner else ''})")
    out.append("  )")
    if d.functions:
        out.append("  (:functions")
        for name, params in d.functions:
            inner = _fmt_typed(params, typing)
            out.append(f"    ({name}{' ' + inner if inner else ''}) - number")
        out.append("  )")
    for a in d.actions:
        out.append(f"  (:action {a.name}")
        out.append(f"    :parameters ({_fmt_typed(a.parameters, typing)})")
        out.append(f"    :precondition {_fmt_conj(a.precondition, '    ')}")
        effects = [str(x) for x in a.add] + [f"(not {x})" for x in a.delete]
        if a.cost is not None:
            amount = str(a.cost.value) if a.cost.function is None else str(a.cost.function)
            effects.append(f"(increase (total-cost) {amount})")
        if not effects:
            out.append("    :effect ()")
        else:
            out.append("    :effect (and " + "\n                 ".join(effects) + ")")
        out.append("  )")
    out.append(")")
    return "\n".join(out) + "\n"


def print_problem(p: ProblemAst, typing: bool = True) -> str:
    out = [f"(define (problem {p.name})", f"  (:domain {p.domain_name})"]
    if p.objects:
        out.append(f"  (:objects {_fmt_typed(p.objects, typing)})")
    out.append("  (:init")
    out.extend(f"    {a}" for a in p.init)
    out.extend(f"    (= {f} {v})" for f, v in p.numeric_init)
    out.append("  )")
    out.append(f"  (:goal {_fmt_conj(p.goal, '  ')})")
    if p.metric:
        out.append("  (:metric minimize (total-cost))")
    out.append(")")
    return "\n".join(out) + "\n"
