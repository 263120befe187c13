"""A small finite-domain solver instrumented with tracer hooks at all 14 ports.

Propagation is a FIFO queue of variable updates; constraints awakened per
update in identifier order.  Inequalities use bounds reasoning, equality,
disequality, element and pairwise-alldifferent work at value level.  Search
is depth-first with binary labeling decisions (x = v versus x != v) posted
as internal "assign" constraints.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .intset import MAX_INT, IntSet
from .trace_model import AttributeKey, Port, TraceEvent, UnavailableAttributeError


class KernelError(Exception):
    pass


class ModelSyntaxError(KernelError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UndeclaredVariableError(KernelError):
    def __init__(self, name: str):
        super().__init__(f"undeclared variable: {name!r}")
        self.name = name


class UnknownProgramError(KernelError):
    def __init__(self, spec: str):
        super().__init__(f"unknown catalog program: {spec!r}")
        self.spec = spec


# Canonical constraint kinds and their model-file spellings.
CTYPES = {
    "eq": "x_eq_y",
    "neq": "x_neq_y",
    "lt": "x_lt_y",
    "lte": "x_lte_y",
    "eqc": "x_eq_c",
    "neqc": "x_neq_c",
    "gtec": "x_gte_c",
    "ltec": "x_lte_c",
    "plusneq": "x_plus_c_neq_y",
    "element": "fd_element",
    "alldiff": "alldifferent_pairwise",
    "sum": "sum_eq",
}


@dataclass(frozen=True)
class ConstraintSpec:
    ctype: str                       # canonical kind string
    var_names: Tuple[str, ...]
    params: Tuple = ()               # integers / value lists / coefficient lists
    cname: Optional[str] = None


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: IntSet


@dataclass(frozen=True)
class ChoiceItem:
    alternatives: Tuple[ConstraintSpec, ...]


@dataclass(frozen=True)
class ConsItem:
    spec: ConstraintSpec


@dataclass(frozen=True)
class Model:
    variables: Tuple[VarDecl, ...]
    items: Tuple = ()
    var_order: str = "input"         # input | firstfail
    val_order: str = "asc"


@dataclass
class Variable:
    vident: int
    vname: str                       # "" when unnamed
    domain: IntSet


@dataclass
class Constraint:
    cident: int
    ctype: str
    var_ids: Tuple[int, ...]
    params: Tuple = ()
    crep: str = ""
    cname: str = ""
    cstr_type: str = ""
    decision: bool = False


@dataclass
class SolveOutcome:
    solutions: List[Dict[str, int]]
    nodes: int
    failures: int


def remove_values(domain: IntSet, removed: IntSet) -> Tuple[IntSet, IntSet]:
    """Split a domain against a removal set: (remaining, delta actually removed)."""
    delta = removed.intersect(domain)
    return domain.subtract(delta), delta


# ---------------------------------------------------------------------------
# Model file format


_NAME_RE = re.compile(r"[a-z][a-z0-9_]*$")


def _parse_var_line(parts: List[str], lineno: int) -> VarDecl:
    if len(parts) != 3:
        raise ModelSyntaxError(lineno, "expected: var <name> <lo>..<hi> | var <name> {v,...}")
    name, domspec = parts[1], parts[2]
    if not _NAME_RE.match(name):
        raise ModelSyntaxError(lineno, f"bad variable name {name!r}")
    try:
        if domspec.startswith("{") and domspec.endswith("}"):
            values = [int(v) for v in domspec[1:-1].split(",") if v.strip()]
            dom = IntSet.from_values(values)
        else:
            lo_s, hi_s = domspec.split("..", 1)
            dom = IntSet.range(int(lo_s), int(hi_s))
    except (ValueError, KeyError):
        raise ModelSyntaxError(lineno, f"bad domain {domspec!r}") from None
    return VarDecl(name, dom)


def _parse_cons_words(words: List[str], lineno: int, declared: set) -> ConstraintSpec:
    if not words:
        raise ModelSyntaxError(lineno, "empty constraint")
    kind = words[0]
    ctype = CTYPES.get(kind)
    if ctype is None:
        raise ModelSyntaxError(lineno, f"unknown constraint kind {kind!r}")
    args = words[1:]

    def var(name: str) -> str:
        if name not in declared:
            raise UndeclaredVariableError(name)
        return name

    def integer(text: str) -> int:
        try:
            return int(text)
        except ValueError:
            raise ModelSyntaxError(lineno, f"expected integer, got {text!r}") from None

    if ctype in ("x_eq_y", "x_neq_y", "x_lt_y", "x_lte_y"):
        if len(args) != 2:
            raise ModelSyntaxError(lineno, f"{kind} takes two variables")
        return ConstraintSpec(ctype, (var(args[0]), var(args[1])))
    if ctype in ("x_eq_c", "x_neq_c", "x_gte_c", "x_lte_c"):
        if len(args) != 2:
            raise ModelSyntaxError(lineno, f"{kind} takes a variable and an integer")
        return ConstraintSpec(ctype, (var(args[0]),), (integer(args[1]),))
    if ctype == "x_plus_c_neq_y":
        if len(args) != 3:
            raise ModelSyntaxError(lineno, f"{kind} takes variable, integer, variable")
        return ConstraintSpec(ctype, (var(args[0]), var(args[2])), (integer(args[1]),))
    if ctype == "fd_element":
        if len(args) != 3:
            raise ModelSyntaxError(lineno, f"{kind} takes index var, value list, value var")
        values = tuple(integer(v) for v in args[1].split(","))
        return ConstraintSpec(ctype, (var(args[0]), var(args[2])), (values,))
    if ctype == "alldifferent_pairwise":
        if len(args) < 2:
            raise ModelSyntaxError(lineno, f"{kind} takes at least two variables")
        return ConstraintSpec(ctype, tuple(var(a) for a in args))
    if ctype == "sum_eq":
        # cons sum 1000*s,91*e,... <k>
        if len(args) != 2:
            raise ModelSyntaxError(lineno, f"{kind} takes coef*var list and a constant")
        terms = []
        for term in args[0].split(","):
            if "*" not in term:
                raise ModelSyntaxError(lineno, f"bad sum term {term!r}")
            coef_s, name = term.split("*", 1)
            terms.append((integer(coef_s), var(name)))
        coefs = tuple(c for c, _ in terms)
        names = tuple(n for _, n in terms)
        return ConstraintSpec(ctype, names, (coefs, integer(args[1])))
    raise ModelSyntaxError(lineno, f"unhandled constraint kind {kind!r}")


def load_model(text: str) -> Model:
    """Parse the line-oriented model format ('#' comments, blank lines ignored)."""
    variables: List[VarDecl] = []
    declared: set = set()
    items: List = []
    var_order, val_order = "input", "asc"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "var":
            decl = _parse_var_line(parts, lineno)
            if decl.name in declared:
                raise ModelSyntaxError(lineno, f"variable {decl.name!r} declared twice")
            variables.append(decl)
            declared.add(decl.name)
        elif head == "cons":
            items.append(ConsItem(_parse_cons_words(parts[1:], lineno, declared)))
        elif head == "choice":
            body = line[len("choice"):].strip()
            alts = []
            for alt in body.split("|"):
                alts.append(_parse_cons_words(alt.split(), lineno, declared))
            if not alts:
                raise ModelSyntaxError(lineno, "empty choice")
            items.append(ChoiceItem(tuple(alts)))
        elif head == "label":
            if len(parts) != 3 or parts[1] not in ("input", "firstfail") or parts[2] != "asc":
                raise ModelSyntaxError(lineno, "expected: label <input|firstfail> asc")
            var_order, val_order = parts[1], parts[2]
        else:
            raise ModelSyntaxError(lineno, f"unknown directive {head!r}")
    return Model(tuple(variables), tuple(items), var_order, val_order)


# ---------------------------------------------------------------------------
# Live attribute provider


class LiveAttributeProvider:
    """Computes non-common attributes from the live solver state."""

    __slots__ = ("solver", "specifics")

    def __init__(self, solver: "Solver", specifics: dict):
        self.solver = solver
        self.specifics = specifics

    def __call__(self, event: TraceEvent, key: AttributeKey):
        solver, spec = self.solver, self.specifics
        name = key.name
        if name in ("vident", "delta", "dom"):
            try:
                return spec[name]
            except KeyError:
                raise UnavailableAttributeError(key, event.port) from None
        if name == "vname":
            return solver.variables[spec["vident"]].vname
        if name == "var":
            return f"v{spec['vident']}"
        if name == "cident":
            try:
                return spec["cident"]
            except KeyError:
                raise UnavailableAttributeError(key, event.port) from None
        if name in ("cname", "cstr", "cstrRep", "cstrType", "cinternal", "varC"):
            c = solver.constraints[spec["cident"]]
            if name == "cname":
                return c.cname
            if name == "cstr":
                return f"c{c.cident}"
            if name == "cstrRep":
                return c.crep
            if name == "cstrType":
                return c.cstr_type
            if name == "cinternal":
                return c.ctype
            return tuple((str(i + 1), f"v{vid}") for i, vid in enumerate(c.var_ids))
        if name == "full_dom":
            out = IntSet.empty()
            for v in solver.variables.values():
                out = out.union(v.domain)
            return out
        if name == "named_vars":
            return tuple(
                (v.vname, v.vident) for v in solver.variables.values() if v.vname
            )
        raise UnavailableAttributeError(key, event.port)


# ---------------------------------------------------------------------------
# Solver

SUSPEND, ENTAIL, REJECT = "suspend", "entail", "reject"

# Hook interface: callable(port, specifics_dict).  The specifics carry raw
# per-port data (ids, delta, domain snapshot); everything else is derived
# lazily through LiveAttributeProvider.
Hook = Callable[[Port, dict], None]


class StopSearch(Exception):
    pass


class Solver:
    def __init__(self, model: Model, hook: Optional[Hook] = None,
                 solution_limit: Optional[int] = None):
        self.model = model
        self.hook = hook
        self.solution_limit = solution_limit
        self.variables: Dict[int, Variable] = {}
        self.by_name: Dict[str, int] = {}
        self.constraints: Dict[int, Constraint] = {}
        self.store: set = set()
        self.watchers: Dict[int, List[int]] = {}
        self.queue: deque = deque()
        self.depth = 0
        self.node = 0
        self._next_node = 1
        self._next_cid = 1
        self._next_vid = 1
        self.solutions: List[Dict[str, int]] = []
        self.nodes = 0
        self.failures = 0

    # -- events -------------------------------------------------------------

    def emit(self, port: Port, specifics: dict) -> None:
        hook = self.hook
        if hook is not None:
            hook(port, specifics)

    # -- construction -------------------------------------------------------

    def _new_variable(self, decl: VarDecl) -> Variable:
        vid = self._next_vid
        self._next_vid += 1
        v = Variable(vid, decl.name, decl.domain)
        self.variables[vid] = v
        self.by_name[decl.name] = vid
        self.watchers[vid] = []
        self.emit(Port.newVariable, {"vident": vid, "dom": v.domain})
        return v

    def _crep(self, ctype: str, var_ids: Sequence[int], params: Tuple) -> str:
        parts: List[str] = []
        if ctype == "fd_element":
            values = params[0]
            parts = [f"v{var_ids[0]}", "[" + ",".join(str(v) for v in values) + "]",
                     f"v{var_ids[1]}"]
        elif ctype == "x_plus_c_neq_y":
            parts = [f"v{var_ids[0]}", str(params[0]), f"v{var_ids[1]}"]
        elif ctype == "sum_eq":
            coefs, k = params
            parts = [",".join(f"{c}*v{vid}" for c, vid in zip(coefs, var_ids)), str(k)]
        else:
            parts = [f"v{vid}" for vid in var_ids] + [str(p) for p in params]
        return f"{ctype}([" + ",".join(parts) + "])"

    def _make_constraint(self, spec: ConstraintSpec, decision: bool = False) -> Constraint:
        cid = self._next_cid
        self._next_cid += 1
        var_ids = tuple(self.by_name[n] for n in spec.var_names)
        # Type-level name as seen by patterns; "fd_element" keeps its
        # variable-indexed spelling there, while crep/cinternal stay short.
        type_names = {"fd_element": "fd_element_var"}
        cstr_type = "assign" if decision else type_names.get(spec.ctype, spec.ctype)
        c = Constraint(
            cident=cid,
            ctype=spec.ctype,
            var_ids=var_ids,
            params=spec.params,
            crep=self._crep(spec.ctype, var_ids, spec.params),
            cname=spec.cname or "",
            cstr_type=cstr_type,
            decision=decision,
        )
        self.constraints[cid] = c
        self.store.add(cid)
        if not decision:
            for vid in var_ids:
                self.watchers[vid].append(cid)
        return c

    # -- propagation --------------------------------------------------------

    def _reduce(self, c: Constraint, vid: int, new_domain: IntSet) -> None:
        """Apply a strict reduction (new_domain must be a proper, non-empty subset)."""
        var = self.variables[vid]
        delta = var.domain.subtract(new_domain)
        var.domain = new_domain
        self.emit(Port.reduce, {
            "cident": c.cident, "vident": vid, "delta": delta, "dom": new_domain,
        })
        self.queue.append((vid, c.cident, c.decision))

    def _shrink(self, c: Constraint, vid: int, new_domain: IntSet) -> bool:
        """Reduce if changed; returns False when the new domain would be empty."""
        if new_domain.is_empty():
            return False
        var = self.variables[vid]
        if new_domain != var.domain:
            self._reduce(c, vid, new_domain)
        return True

    def _dom(self, vid: int) -> IntSet:
        return self.variables[vid].domain

    def _filter(self, c: Constraint) -> str:
        method = getattr(self, "_filter_" + c.ctype)
        return method(c)

    def _filter_x_eq_y(self, c: Constraint) -> str:
        a, b = c.var_ids
        inter = self._dom(a).intersect(self._dom(b))
        if inter.is_empty():
            return REJECT
        self._shrink(c, a, inter)
        self._shrink(c, b, inter)
        return SUSPEND

    def _filter_x_neq_y(self, c: Constraint) -> str:
        a, b = c.var_ids
        da, db = self._dom(a), self._dom(b)
        if da.is_singleton() and db.is_singleton():
            return REJECT if da.min() == db.min() else ENTAIL
        if da.is_singleton():
            return ENTAIL if self._shrink(c, b, db.remove_value(da.min())) else REJECT
        if db.is_singleton():
            return ENTAIL if self._shrink(c, a, da.remove_value(db.min())) else REJECT
        if da.intersect(db).is_empty():
            return ENTAIL
        return SUSPEND

    def _filter_x_lt_y(self, c: Constraint) -> str:
        return self._bounds_less(c, strict=True)

    def _filter_x_lte_y(self, c: Constraint) -> str:
        return self._bounds_less(c, strict=False)

    def _bounds_less(self, c: Constraint, strict: bool) -> str:
        a, b = c.var_ids
        gap = 1 if strict else 0
        na = self._dom(a).clamp_max(self._dom(b).max() - gap)
        if not self._shrink(c, a, na):
            return REJECT
        nb = self._dom(b).clamp_min(self._dom(a).min() + gap)
        if not self._shrink(c, b, nb):
            return REJECT
        if self._dom(a).max() + gap <= self._dom(b).min():
            return ENTAIL
        return SUSPEND

    def _filter_x_eq_c(self, c: Constraint) -> str:
        (a,) = c.var_ids
        (k,) = c.params
        if k not in self._dom(a):
            return REJECT
        self._shrink(c, a, IntSet.from_values([k]))
        return ENTAIL

    def _filter_x_neq_c(self, c: Constraint) -> str:
        (a,) = c.var_ids
        (k,) = c.params
        return ENTAIL if self._shrink(c, a, self._dom(a).remove_value(k)) else REJECT

    def _filter_x_gte_c(self, c: Constraint) -> str:
        (a,) = c.var_ids
        (k,) = c.params
        return ENTAIL if self._shrink(c, a, self._dom(a).clamp_min(k)) else REJECT

    def _filter_x_lte_c(self, c: Constraint) -> str:
        (a,) = c.var_ids
        (k,) = c.params
        return ENTAIL if self._shrink(c, a, self._dom(a).clamp_max(k)) else REJECT

    def _filter_x_plus_c_neq_y(self, c: Constraint) -> str:
        a, b = c.var_ids
        (k,) = c.params
        da, db = self._dom(a), self._dom(b)
        if da.is_singleton():
            v = da.min() + k
            if 0 <= v <= MAX_INT and not self._shrink(c, b, db.remove_value(v)):
                return REJECT
            return ENTAIL
        if db.is_singleton():
            v = db.min() - k
            if 0 <= v <= MAX_INT and not self._shrink(c, a, da.remove_value(v)):
                return REJECT
            return ENTAIL
        return SUSPEND

    def _filter_fd_element(self, c: Constraint) -> str:
        i, a = c.var_ids
        (values,) = c.params
        di, da = self._dom(i), self._dom(a)
        valid = [k for k in range(1, len(values) + 1)
                 if k in di and values[k - 1] in da]
        if not valid:
            return REJECT
        self._shrink(c, i, IntSet.from_values(valid))
        self._shrink(c, a, IntSet.from_values(values[k - 1] for k in valid))
        di, da = self._dom(i), self._dom(a)
        if di.is_singleton() and da.is_singleton():
            return ENTAIL
        return SUSPEND

    def _filter_alldifferent_pairwise(self, c: Constraint) -> str:
        changed = True
        while changed:
            changed = False
            for x in c.var_ids:
                dx = self._dom(x)
                if not dx.is_singleton():
                    continue
                v = dx.min()
                for y in c.var_ids:
                    if y == x:
                        continue
                    dy = self._dom(y)
                    if v in dy:
                        if dy.is_singleton():
                            return REJECT
                        if not self._shrink(c, y, dy.remove_value(v)):
                            return REJECT
                        changed = True
        if all(self._dom(x).is_singleton() for x in c.var_ids):
            return ENTAIL
        return SUSPEND

    def _filter_sum_eq(self, c: Constraint) -> str:
        coefs, k = c.params
        var_ids = c.var_ids
        los = []
        his = []
        for coef, vid in zip(coefs, var_ids):
            d = self._dom(vid)
            lo, hi = d.min(), d.max()
            if coef >= 0:
                los.append(coef * lo)
                his.append(coef * hi)
            else:
                los.append(coef * hi)
                his.append(coef * lo)
        total_lo, total_hi = sum(los), sum(his)
        if not (total_lo <= k <= total_hi):
            return REJECT
        for idx, (coef, vid) in enumerate(zip(coefs, var_ids)):
            if coef == 0:
                continue
            rest_lo = total_lo - los[idx]
            rest_hi = total_hi - his[idx]
            # coef * x must lie in [k - rest_hi, k - rest_lo]
            lo_c, hi_c = k - rest_hi, k - rest_lo
            if coef > 0:
                new_lo = -(-lo_c // coef)
                new_hi = hi_c // coef
            else:
                new_lo = -(-hi_c // coef)
                new_hi = lo_c // coef
            d = self._dom(vid)
            nd = d.clamp_min(max(new_lo, 0)).clamp_max(min(new_hi, MAX_INT))
            if not self._shrink(c, vid, nd):
                return REJECT
        if all(self._dom(v).is_singleton() for v in var_ids):
            value = sum(coef * self._dom(v).min() for coef, v in zip(coefs, var_ids))
            return ENTAIL if value == k else REJECT
        return SUSPEND

    def _activate(self, c: Constraint) -> bool:
        """Run a constraint's filter and emit its closing status event."""
        status = self._filter(c)
        if status == SUSPEND:
            self.emit(Port.suspend, {"cident": c.cident})
            return True
        if status == ENTAIL:
            self.emit(Port.entail, {"cident": c.cident})
            self.store.discard(c.cident)
            return True
        self.emit(Port.reject, {"cident": c.cident})
        self.store.discard(c.cident)
        return False

    def propagate(self) -> bool:
        """Drain the update queue to a fixed point; False on inconsistency."""
        queue = self.queue
        while queue:
            vid, producer, from_decision = queue.popleft()
            if from_decision:
                self.emit(Port.schedule, {"vident": vid, "dom": self.variables[vid].domain})
            for cid in self.watchers[vid]:
                if cid == producer or cid not in self.store:
                    continue
                c = self.constraints[cid]
                self.emit(Port.awake, {"cident": cid})
                if not self._activate(c):
                    queue.clear()
                    return False
        return True

    # -- search -------------------------------------------------------------

    def _snapshot(self):
        return (
            {vid: v.domain for vid, v in self.variables.items()},
            set(self.store),
        )

    def _restore(self, snap) -> None:
        domains, store = snap
        for vid, dom in domains.items():
            self.variables[vid].domain = dom
        self.store = set(store)
        self.queue.clear()

    def _fail_leaf(self) -> None:
        self.failures += 1
        self.queue.clear()
        self.emit(Port.failure, {})

    def _post_and_propagate(self, c: Constraint) -> bool:
        return self._activate(c) and self.propagate()

    def _run_items(self, k: int) -> None:
        if k == len(self.model.items):
            self._label()
            return
        item = self.model.items[k]
        if isinstance(item, ConsItem):
            c = self._make_constraint(item.spec)
            self.emit(Port.newConstraint, {"cident": c.cident})
            if self._post_and_propagate(c):
                self._run_items(k + 1)
            else:
                self._fail_leaf()
            return
        # Disjunction: the first alternative continues the current node;
        # later alternatives are reached by a back-jump and get a new node.
        cp_node = self.node
        for _ in item.alternatives:
            self._next_cid += 1  # branch bookkeeping consumes one id per alternative
        self.depth += 1
        for idx, alt in enumerate(item.alternatives):
            snap = self._snapshot()
            if idx > 0:
                self.node = cp_node
                self.emit(Port.jumpTo, {})
                self.node = self._next_node
                self._next_node += 1
                self.nodes += 1
                self.emit(Port.newChild, {})
            c = self._make_constraint(alt)
            self.emit(Port.newConstraint, {"cident": c.cident})
            if self._post_and_propagate(c):
                self._run_items(k + 1)
            else:
                self._fail_leaf()
            self._restore(snap)
            self.node = cp_node
        self.depth -= 1

    def _select_variable(self) -> Optional[Variable]:
        unbound = [
            self.variables[self.by_name[d.name]]
            for d in self.model.variables
            if not self.variables[self.by_name[d.name]].domain.is_singleton()
        ]
        if not unbound:
            return None
        if self.model.var_order == "firstfail":
            return min(unbound, key=lambda v: (v.domain.size(), v.vident))
        return unbound[0]

    def _record_solution(self) -> None:
        sol = {
            (v.vname or f"v{v.vident}"): v.domain.min()
            for v in self.variables.values()
        }
        self.solutions.append(sol)
        self.emit(Port.solution, {})
        if self.solution_limit is not None and len(self.solutions) >= self.solution_limit:
            raise StopSearch()

    def _label(self) -> None:
        var = self._select_variable()
        if var is None:
            self._record_solution()
            return
        value = var.domain.min()
        cp_node = self.node
        self.depth += 1
        for idx, ctype in enumerate(("x_eq_c", "x_neq_c")):
            snap = self._snapshot()
            if idx > 0:
                self.node = cp_node
                self.emit(Port.jumpTo, {})
            self.node = self._next_node
            self._next_node += 1
            self.nodes += 1
            self.emit(Port.newChild, {})
            spec = ConstraintSpec(ctype, (var.vname or f"v{var.vident}",), (value,))
            c = self._make_constraint(spec, decision=True)
            self.emit(Port.post, {"cident": c.cident})
            if self._post_and_propagate(c):
                self._label()
            else:
                self._fail_leaf()
            self._restore(snap)
            self.node = cp_node
        self.depth -= 1

    def solve(self) -> SolveOutcome:
        try:
            for decl in self.model.variables:
                self._new_variable(decl)
            self._run_items(0)
        except StopSearch:
            pass
        finally:
            self.emit(Port.endOfTrace, {})
        return SolveOutcome(self.solutions, self.nodes, self.failures)


def solve(model: Model, hook: Optional[Hook] = None,
          solution_limit: Optional[int] = None) -> SolveOutcome:
    return Solver(model, hook=hook, solution_limit=solution_limit).solve()


# ---------------------------------------------------------------------------
# Built-in program catalog

FIGTRACE_SOURCE = """\
# element/equality toy program: two variables, one element constraint,
# then a two-way disjunction of which only the second branch is feasible.
var i 0..268435455
var a 0..268435455
cons element i 2,5,7 a
choice eq a i | eqc a 2
"""


def _queens_model(n: int) -> Model:
    lines = [f"var q{i} 1..{n}" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            lines.append(f"cons neq q{i} q{j}")
            lines.append(f"cons plusneq q{i} {j - i} q{j}")
            lines.append(f"cons plusneq q{j} {j - i} q{i}")
    return load_model("\n".join(lines))


def _propag_model(n: int) -> Model:
    return load_model("\n".join([
        f"var x 0..{MAX_INT}",
        f"var y 0..{MAX_INT}",
        "cons gtec x 1",
        f"cons ltec y {n}",
        "cons lt x y",
        "cons lt y x",
    ]))


def _sendmory_model(copies: int = 1) -> Model:
    # With copies > 1 the puzzle is repeated over disjoint variable sets;
    # that scales the run length without changing the per-event work.
    lines: List[str] = []
    for k in range(1, copies + 1):
        tag = "" if copies == 1 else str(k)
        names = {l: f"{l}{tag}" for l in "sendmory"}
        lines += [f"var {names[l]} 0..9" for l in "sendmory"]
        lines += [
            f"cons gtec {names['s']} 1",
            f"cons gtec {names['m']} 1",
            "cons alldiff " + " ".join(names[l] for l in "sendmory"),
            ("cons sum 1000*{s},91*{e},-90*{n},1*{d},-9000*{m},-900*{o},"
             "10*{r},-1*{y} 0").format(**names),
        ]
    lines += [
        "label firstfail asc",
    ]
    return load_model("\n".join(lines))


def _random_model(n: int, dsize: int, ncons: int, seed: int) -> Model:
    import random as _random

    rng = _random.Random(seed)
    lines = [f"var x{i} 0..{dsize - 1}" for i in range(1, n + 1)]
    kinds = ["neq", "lt", "lte", "plusneq"]
    for _ in range(ncons):
        i, j = rng.sample(range(1, n + 1), 2)
        kind = rng.choice(kinds)
        if kind == "plusneq":
            lines.append(f"cons plusneq x{i} {rng.randint(0, dsize - 1)} x{j}")
        else:
            lines.append(f"cons {kind} x{i} x{j}")
    return load_model("\n".join(lines))


_PROGRAM_RE = re.compile(r"([a-z]+)(?:\(([^)]*)\))?$")


def catalog_model(spec: str) -> Model:
    """Resolve a catalog program spec like ``queens(8)`` or ``figtrace``."""
    m = _PROGRAM_RE.match(spec.strip())
    if not m:
        raise UnknownProgramError(spec)
    name, argtext = m.group(1), m.group(2)
    args = [int(a) for a in argtext.split(",")] if argtext else []
    try:
        if name == "figtrace" and not args:
            return load_model(FIGTRACE_SOURCE)
        if name == "queens" and len(args) == 1:
            return _queens_model(args[0])
        if name == "propag" and len(args) == 1:
            return _propag_model(args[0])
        if name == "sendmory" and len(args) <= 1:
            return _sendmory_model(*args)
        if name == "random" and len(args) == 4:
            return _random_model(*args)
    except KernelError:
        raise
    raise UnknownProgramError(spec)


CATALOG_PROGRAMS = ("figtrace", "queens(n)", "propag(n)", "sendmory", "random(n,d,m,seed)")
