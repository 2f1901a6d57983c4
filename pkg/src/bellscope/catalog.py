"""Named Bell inequalities, their families, reduction maps and the text format.

Tables follow the usual square layout: the first row holds A-marginal
coefficients, the first column B-marginal coefficients, and the body the
joint coefficients with rows indexed by ``(iB, jB)`` and columns by
``(iA, jA)``. Only outcomes ``0..n-2`` appear, exactly the CG coordinates.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .errors import InvalidPartition, ParameterOutOfRange, ParseError
from .polytope import Inequality
from .scenario import Scenario, joint_expansion, marginal_a_expansion, marginal_b_expansion

FAMILIES = ("CHSH", "I3322", "I2233", "Imm22", "I22nn", "Immnn",
            "I3422_1", "I3422_2", "I3422_3", "Positivity")


@dataclass(frozen=True)
class FamilyId:
    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ParameterOutOfRange(f"unknown family {self.name!r}")
        need = {"Imm22": 1, "I22nn": 1, "Immnn": 2, "Positivity": 4}.get(self.name, 0)
        if len(self.params) != need:
            raise ParameterOutOfRange(f"{self.name} takes {need} parameter(s), got {self.params}")
        if self.name in ("Imm22", "I22nn", "Immnn") and any(p < 2 for p in self.params):
            raise ParameterOutOfRange(f"{self.name} needs parameters >= 2, got {self.params}")
        if self.name == "Positivity" and any(p < 0 for p in self.params):
            raise ParameterOutOfRange("positivity indices are non-negative")

    @classmethod
    def parse(cls, text):
        """``"I3322"``, ``"Imm22:4"``, ``"Immnn:3,3"``, ``"Positivity:0,0,1,1"``."""
        name, _, rest = text.partition(":")
        params = tuple(int(p) for p in rest.split(",")) if rest else ()
        return cls(name.strip(), params)

    def __str__(self):
        return self.name + (":" + ",".join(map(str, self.params)) if self.params else "")


# tables ------------------------------------------------------------------------

def from_table(s, a_row, b_col, body, bound, label=None):
    """Inequality from a square table (flattened rows/columns, no block nesting)."""
    ka, kb = s.nA - 1, s.nB - 1
    if len(a_row) != s.mA * ka or len(b_col) != s.mB * kb or len(body) != s.mB * kb \
            or any(len(r) != s.mA * ka for r in body):
        raise ParseError(f"table shape does not match scenario {s}")
    coeffs = [0] * (s.mA * ka + s.mB * kb + s.mA * s.mB * ka * kb)
    for iA, jA in product(range(s.mA), range(ka)):
        coeffs[s.a_index(iA, jA)] = a_row[iA * ka + jA]
    for iB, jB in product(range(s.mB), range(kb)):
        coeffs[s.b_index(iB, jB)] = b_col[iB * kb + jB]
        for iA, jA in product(range(s.mA), range(ka)):
            coeffs[s.joint_index(iA, iB, jA, jB)] = body[iB * kb + jB][iA * ka + jA]
    return Inequality(s, tuple(coeffs), bound, label)


def to_table(q):
    """Inverse of ``from_table``: ``(a_row, b_col, body)``."""
    s = q.scenario
    ka, kb = s.nA - 1, s.nB - 1
    a_row = [q.coeffs[s.a_index(iA, jA)] for iA in range(s.mA) for jA in range(ka)]
    b_col = [q.coeffs[s.b_index(iB, jB)] for iB in range(s.mB) for jB in range(kb)]
    body = [[q.coeffs[s.joint_index(iA, iB, jA, jB)] for iA in range(s.mA) for jA in range(ka)]
            for iB in range(s.mB) for jB in range(kb)]
    return a_row, b_col, body


def _blocks(values, size):
    return " | ".join(" ".join(str(v) for v in values[k:k + size])
                      for k in range(0, len(values), size))


def emit(q):
    """Render an inequality in the bit-exact text format (trailing newline included)."""
    s = q.scenario
    a_row, b_col, body = to_table(q)
    lines = [f"scenario {s.mA} {s.mB} {s.nA} {s.nB}"]
    if q.label:
        lines.append(f"label {q.label}")
    lines.append(f"bound {q.bound}")
    lines.append(_blocks(a_row, s.nA - 1))
    for b, row in zip(b_col, body):
        lines.append(f"{b} | {_blocks(row, s.nA - 1)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _ints(text, where):
    try:
        return [int(t) for t in text.split()]
    except ValueError:
        raise ParseError(f"expected integers in {where}: {text!r}") from None


def parse_many(text):
    """Parse every inequality block in ``text``."""
    lines = text.splitlines()
    out = []
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip() or lines[pos].startswith("#"):
            pos += 1
            continue
        q, pos = _parse_block(lines, pos)
        out.append(q)
    return out


def parse(text):
    qs = parse_many(text)
    if len(qs) != 1:
        raise ParseError(f"expected exactly one inequality, found {len(qs)}")
    return qs[0]


def _parse_block(lines, pos):
    def take():
        nonlocal pos
        if pos >= len(lines):
            raise ParseError("unexpected end of input")
        line = lines[pos]
        pos += 1
        return line

    head = take().split()
    if len(head) != 5 or head[0] != "scenario":
        raise ParseError(f"line {pos}: expected 'scenario mA mB nA nB'")
    try:
        s = Scenario(*(int(x) for x in head[1:]))
    except (ValueError, ParameterOutOfRange) as exc:
        raise ParseError(f"line {pos}: bad scenario: {exc}") from None
    line = take()
    label = None
    if line.startswith("label "):
        label = line[len("label "):]
        line = take()
    parts = line.split()
    if len(parts) != 2 or parts[0] != "bound":
        raise ParseError(f"line {pos}: expected 'bound <integer>'")
    bound = _ints(parts[1], f"line {pos}")[0]
    a_row = _ints(take().replace("|", " "), f"line {pos}")
    b_col, body = [], []
    for _ in range(s.mB * (s.nB - 1)):
        line = take()
        first, sep, rest = line.partition("|")
        if not sep:
            raise ParseError(f"line {pos}: missing '|' after the B-marginal entry")
        b_col.extend(_ints(first, f"line {pos}"))
        body.append(_ints(rest.replace("|", " "), f"line {pos}"))
    if take().strip() != "end":
        raise ParseError(f"line {pos}: expected 'end'")
    return from_table(s, a_row, b_col, body, bound, label), pos


# verbatim transcriptions -----------------------------------------------------------

_VERBATIM = {
    "CHSH": (Scenario(2, 2, 2, 2), [-1, 0], [-1, 0],
             [[1, 1],
              [1, -1]], 0),
    "I3322": (Scenario(3, 3, 2, 2), [-1, 0, 0], [-2, -1, 0],
              [[1, 1, 1],
               [1, 1, -1],
               [1, -1, 0]], 0),
    "I2233": (Scenario(2, 2, 3, 3), [-1, -1, 0, 0], [-1, -1, 0, 0],
              [[1, 1, 0, 1],
               [1, 0, 1, 1],
               [0, 1, 0, -1],
               [1, 1, -1, -1]], 0),
    "I3422_1": (Scenario(3, 4, 2, 2), [1, 1, -2], [1, 0, 0, 1],
                [[-1, -1, 1],
                 [-1, 1, 1],
                 [1, -1, 1],
                 [-1, -1, -1]], 2),
    "I3422_2": (Scenario(3, 4, 2, 2), [0, 1, -1], [-1, 0, -1, 1],
                [[-1, 1, 1],
                 [0, -1, 1],
                 [1, 0, 1],
                 [-1, -1, 0]], 1),
    "I3422_3": (Scenario(3, 4, 2, 2), [1, 0, -1], [0, 0, -1, 2],
                [[-2, 1, 1],
                 [0, -1, 1],
                 [1, 1, 1],
                 [-1, -1, -1]], 2),
}


def _xyz(n):
    """The (n-1)x(n-1) blocks X, Y, Z, indexed [jB][jA]."""
    k = n - 1
    X = [[int(a + b <= n - 2) for a in range(k)] for b in range(k)]
    Y = [[int(a + b >= n - 2) for a in range(k)] for b in range(k)]
    Z = [row[:] for row in Y]
    Z[-1] = [0] * k
    return X, Y, Z


def _immnn(m, n):
    s = Scenario(m, m, n, n)
    k = n - 1
    X, Y, Z = _xyz(n)
    neg = lambda M: [[-v for v in row] for row in M]  # noqa: E731
    body = [[0] * (m * k) for _ in range(m * k)]
    for iB, iA in product(range(m), range(m)):
        d = iA + iB
        block = X if d < m - 1 else Y if d == m - 1 else neg(Y) if d == m else neg(Z)
        for jB, jA in product(range(k), range(k)):
            body[iB * k + jB][iA * k + jA] = block[jB][jA]
    a_row = [-1] * k + [0] * ((m - 1) * k)
    b_col = [-(m - 1 - iB) for iB in range(m) for _ in range(k)]
    return from_table(s, a_row, b_col, body, 0, f"Immnn:{m},{n}")


def _imm22(m):
    s = Scenario(m, m, 2, 2)
    body = [[1 if iA + iB <= m - 1 else -1 if iA + iB == m else 0 for iA in range(m)]
            for iB in range(m)]
    a_row = [-1] + [0] * (m - 1)
    b_col = [-(m - 1 - iB) for iB in range(m)]
    return from_table(s, a_row, b_col, body, 0, f"Imm22:{m}")


def _i22nn(n):
    s = Scenario(2, 2, n, n)
    X, Y, _ = _xyz(n)
    k = n - 1
    body = [X[r] + Y[r] for r in range(k)] + [Y[r] + [-v for v in Y[r]] for r in range(k)]
    return from_table(s, [-1] * k + [0] * k, [-1] * k + [0] * k, body, 0, f"I22nn:{n}")


def positivity(s, iA, iB, jA, jB):
    """``P(jA, jB | iA, iB) >= 0`` written as ``-P <= 0`` in CG coordinates."""
    if not (iA < s.mA and iB < s.mB and jA < s.nA and jB < s.nB):
        raise ParameterOutOfRange(f"positivity index out of range for {s}")
    terms, const = joint_expansion(s, iA, iB, jA, jB)
    coeffs = [0] * s.dimension
    for k, c in terms.items():
        coeffs[k] = -c
    return Inequality.normalized(s, coeffs, const, f"Positivity:{iA},{iB},{jA},{jB}")


def make(f, scenario=None):
    """Build a catalogue inequality; ``f`` is a ``FamilyId`` or its string form."""
    if isinstance(f, str):
        f = FamilyId.parse(f)
    if f.name in _VERBATIM:
        s, a_row, b_col, body, bound = _VERBATIM[f.name]
        return from_table(s, a_row, b_col, body, bound, f.name)
    if f.name == "Imm22":
        return _imm22(*f.params)
    if f.name == "I22nn":
        return _i22nn(*f.params)
    if f.name == "Immnn":
        return _immnn(*f.params)
    iA, iB, jA, jB = f.params
    s = scenario or Scenario(max(iA + 1, 1), max(iB + 1, 1), max(jA + 1, 2), max(jB + 1, 2))
    return positivity(s, iA, iB, jA, jB)


# coordinate substitution ----------------------------------------------------------

def _substitute(q, target, images):
    """Compose ``q`` with an affine map: ``images[k]`` is ``(terms, const)`` in target coords."""
    coeffs = [0] * target.dimension
    bound = q.bound
    for k, c in enumerate(q.coeffs):
        if c == 0:
            continue
        terms, const = images[k]
        bound -= c * const
        for t, v in terms.items():
            coeffs[t] += c * v
    if not any(coeffs):
        raise ParameterOutOfRange("the reduced inequality has no non-zero coefficient")
    return Inequality.normalized(target, coeffs, bound)


def _scale(expr, c):
    terms, const = expr
    return {k: v * c for k, v in terms.items()}, const * c


def _add(*exprs):
    terms, const = {}, 0
    for t, c in exprs:
        const += c
        for k, v in t.items():
            terms[k] = terms.get(k, 0) + v
    return {k: v for k, v in terms.items() if v}, const


def restrict_deterministic(q, fixed):
    """Replace fixed settings by deterministic responses and drop them.

    ``fixed`` maps ``("A", i)`` or ``("B", i)`` (0-based setting) to the
    forced outcome. The remaining settings keep their relative order.
    """
    s = q.scenario
    fa = {i: o for (p, i), o in fixed.items() if p == "A"}
    fb = {i: o for (p, i), o in fixed.items() if p == "B"}
    for p, i in fixed:
        if p not in ("A", "B"):
            raise ParameterOutOfRange(f"party must be 'A' or 'B', got {p!r}")
    if any(not 0 <= i < s.mA or not 0 <= o < s.nA for i, o in fa.items()) or \
            any(not 0 <= i < s.mB or not 0 <= o < s.nB for i, o in fb.items()):
        raise ParameterOutOfRange(f"fixed setting/outcome out of range for {s}")
    keepA = [i for i in range(s.mA) if i not in fa]
    keepB = [i for i in range(s.mB) if i not in fb]
    if not keepA or not keepB:
        raise ParameterOutOfRange("each party must keep at least one setting")
    t = Scenario(len(keepA), len(keepB), s.nA, s.nB)
    newA = {i: k for k, i in enumerate(keepA)}
    newB = {i: k for k, i in enumerate(keepB)}

    def a_marg(iA, jA):
        if iA in fa:
            return {}, int(fa[iA] == jA)
        return marginal_a_expansion(t, newA[iA], jA)

    def b_marg(iB, jB):
        if iB in fb:
            return {}, int(fb[iB] == jB)
        return marginal_b_expansion(t, newB[iB], jB)

    images = {}
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        images[s.a_index(iA, jA)] = a_marg(iA, jA)
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        images[s.b_index(iB, jB)] = b_marg(iB, jB)
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        k = s.joint_index(iA, iB, jA, jB)
        if iA in fa:
            images[k] = _scale(b_marg(iB, jB), int(fa[iA] == jA))
        elif iB in fb:
            images[k] = _scale(a_marg(iA, jA), int(fb[iB] == jB))
        else:
            images[k] = joint_expansion(t, newA[iA], newB[iB], jA, jB)
    return _substitute(q, t, images)


def _check_maps(maps, m, n_large, n_small, party):
    if len(maps) != m:
        raise InvalidPartition(f"need one outcome map per {party} setting")
    for mp in maps:
        if len(mp) != n_large or sorted(set(mp)) != list(range(n_small)):
            raise InvalidPartition(
                f"{party} map {mp} must send {n_large} outcomes onto all of 0..{n_small - 1}")


def merge_outcomes(q_small, a_maps, b_maps):
    """Lift ``q_small`` to more outcomes by grouping.

    ``a_maps[i][j]`` is the small outcome that large outcome ``j`` of A's
    setting ``i`` is merged into (likewise ``b_maps``). The lifted
    inequality's value on any behaviour equals ``q_small`` on the merged
    behaviour.
    """
    s = q_small.scenario
    nA, nB = len(a_maps[0]), len(b_maps[0])
    _check_maps(a_maps, s.mA, nA, s.nA, "A")
    _check_maps(b_maps, s.mB, nB, s.nB, "B")
    t = Scenario(s.mA, s.mB, nA, nB)
    images = {}
    for iA, k in product(range(s.mA), range(s.nA - 1)):
        images[s.a_index(iA, k)] = _add(*(marginal_a_expansion(t, iA, j)
                                          for j in range(nA) if a_maps[iA][j] == k))
    for iB, k in product(range(s.mB), range(s.nB - 1)):
        images[s.b_index(iB, k)] = _add(*(marginal_b_expansion(t, iB, j)
                                          for j in range(nB) if b_maps[iB][j] == k))
    for iA, iB, k, l in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        images[s.joint_index(iA, iB, k, l)] = _add(
            *(joint_expansion(t, iA, iB, j, jj)
              for j in range(nA) if a_maps[iA][j] == k
              for jj in range(nB) if b_maps[iB][jj] == l))
    return _substitute(q_small, t, images)


def restrict_outcomes(q, a_used, b_used):
    """Restrict ``q`` to behaviours that only produce the listed outcomes.

    ``a_used[i]`` lists, in order, the large outcomes that the small
    outcomes ``0, 1, ...`` of A's setting ``i`` are embedded as (likewise
    ``b_used``); all other outcomes get probability zero. The result lives
    in the scenario with ``len(a_used[0])`` / ``len(b_used[0])`` outcomes.
    """
    s = q.scenario
    nA, nB = len(a_used[0]), len(b_used[0])
    for used, m, n in ((a_used, s.mA, s.nA), (b_used, s.mB, s.nB)):
        if len(used) != m or any(len(u) != len(used[0]) or len(set(u)) != len(u)
                                 or any(not 0 <= o < n for o in u) for u in used):
            raise InvalidPartition("outcome embeddings must be injective and in range")
    if nA < 2 or nB < 2:
        raise InvalidPartition("at least two outcomes must remain per setting")
    t = Scenario(s.mA, s.mB, nA, nB)

    def small_a(iA, j):
        return a_used[iA].index(j) if j in a_used[iA] else None

    def small_b(iB, j):
        return b_used[iB].index(j) if j in b_used[iB] else None

    images = {}
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        k = small_a(iA, jA)
        images[s.a_index(iA, jA)] = marginal_a_expansion(t, iA, k) if k is not None else ({}, 0)
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        k = small_b(iB, jB)
        images[s.b_index(iB, jB)] = marginal_b_expansion(t, iB, k) if k is not None else ({}, 0)
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        k, l = small_a(iA, jA), small_b(iB, jB)
        images[s.joint_index(iA, iB, jA, jB)] = (
            joint_expansion(t, iA, iB, k, l) if k is not None and l is not None else ({}, 0))
    return _substitute(q, t, images)


def embed_settings(q, mA, mB, a_settings=None, b_settings=None):
    """Embed ``q`` into a scenario with more settings.

    Setting ``i`` of ``q`` becomes ``a_settings[i]`` (default: ``i``); the
    settings not hit get zero weight.
    """
    s = q.scenario
    a_settings = list(a_settings) if a_settings is not None else list(range(s.mA))
    b_settings = list(b_settings) if b_settings is not None else list(range(s.mB))
    if mA < s.mA or mB < s.mB:
        raise ParameterOutOfRange("embedding cannot remove settings")
    if len(a_settings) != s.mA or len(set(a_settings)) != s.mA or any(not 0 <= i < mA for i in a_settings) \
            or len(b_settings) != s.mB or len(set(b_settings)) != s.mB \
            or any(not 0 <= i < mB for i in b_settings):
        raise ParameterOutOfRange("setting embedding must be injective and in range")
    t = Scenario(mA, mB, s.nA, s.nB)
    coeffs = [0] * t.dimension
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        coeffs[t.a_index(a_settings[iA], jA)] = q.coeffs[s.a_index(iA, jA)]
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        coeffs[t.b_index(b_settings[iB], jB)] = q.coeffs[s.b_index(iB, jB)]
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        coeffs[t.joint_index(a_settings[iA], b_settings[iB], jA, jB)] = \
            q.coeffs[s.joint_index(iA, iB, jA, jB)]
    return Inequality(t, tuple(coeffs), q.bound, q.label)


def pad_settings(q, mA, mB):
    """Embed ``q`` into a scenario with more settings (new settings get zero weight)."""
    return embed_settings(q, mA, mB)


def _compositions(total, parts):
    """Ordered ways of writing ``total`` as ``parts`` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _grouping(sizes):
    return tuple(k for k, size in enumerate(sizes) for _ in range(size))


def lifts(q, target):
    """Representative lifts of ``q`` into ``target``: one per pattern of group sizes.

    Every lift obtained by merging outcomes and adding unused settings is
    equivalent under relabelling to one of these.
    """
    from .symmetry import transpose

    s = q.scenario
    cands = []
    if s.mA <= target.mA and s.mB <= target.mB and s.nA <= target.nA and s.nB <= target.nB:
        cands.append(q)
    t = s.transposed()
    if t != s and t.mA <= target.mA and t.mB <= target.mB and t.nA <= target.nA and t.nB <= target.nB:
        cands.append(transpose(q))
    out = []
    for base in cands:
        bs = base.scenario
        a_pat = list(_compositions(target.nA, bs.nA))
        b_pat = list(_compositions(target.nB, bs.nB))
        for a_sizes in product(a_pat, repeat=bs.mA):
            for b_sizes in product(b_pat, repeat=bs.mB):
                lifted = base
                if target.nA != bs.nA or target.nB != bs.nB:
                    lifted = merge_outcomes(base, [_grouping(x) for x in a_sizes],
                                            [_grouping(x) for x in b_sizes])
                out.append(pad_settings(lifted, target.mA, target.mB))
    return out


def _reference_families():
    base = [positivity(Scenario(1, 1, 2, 2), 0, 0, 0, 0).with_label("Positivity"),
            make("CHSH"), make("I3322"), make("I2233"),
            make("I3422_1"), make("I3422_2"), make("I3422_3")]
    base += [make(FamilyId("Imm22", (m,))) for m in range(4, 8)]
    base += [make(FamilyId("I22nn", (n,))) for n in range(4, 8)]
    base += [make(FamilyId("Immnn", (m, n))) for m in range(3, 6) for n in range(3, 8)]
    return base


@lru_cache(maxsize=16)
def _labels_for(target):
    from .symmetry import canonical_form

    table = {}
    for fam in _reference_families():
        name = fam.label.split(":")[0] if fam.label.startswith(("Imm22", "I22nn")) else fam.label
        if fam.label.startswith(("Imm22", "I22nn", "Immnn")):
            name = fam.label
        s = fam.scenario
        if s.mA * s.mB > target.mA * target.mB or max(s.nA, s.nB) > max(target.nA, target.nB):
            continue
        for lifted in lifts(fam, target):
            key = canonical_form(lifted)
            table.setdefault((key.coeffs, key.bound), name)
    return table


def identify(q):
    """Family name of a canonical inequality in its scenario, or ``None``.

    The name is that of the catalogue inequality whose lift (outcome
    merging plus unused settings) is relabelling-equivalent to ``q``.
    """
    from .symmetry import canonical_form

    key = canonical_form(q)
    return _labels_for(q.scenario).get((key.coeffs, key.bound))
