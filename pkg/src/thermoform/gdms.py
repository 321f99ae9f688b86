"""Graph-directed systems of monotone contracting interval branches.

Vertices carry closed intervals; edges carry injective branches mapping the
interval of their domain vertex into the interval of their image vertex. Words
compose right to left, so the first letter is the outermost map. Countable
edge sets are enumerated lazily and truncated on demand. Parabolic systems
mark edges whose branch has a neutral fixed point; the jump transform turns
runs of a parabolic letter into a fresh uniformly contracting alphabet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BoundaryPointError,
    ConfigError,
    ConvergenceError,
    DomainError,
    WordLengthError,
)
from .shifts import IncidenceMatrix, Potential

Interval = tuple[float, float]


@dataclass(frozen=True)
class Branch:
    """One edge: an injective monotone map from X_dom into X_img."""

    label: object
    dom: int
    img: int
    fn: Callable[[float], float]
    deriv: Callable[[float], float]
    inv: Callable[[float], float] | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def image_of(self, iv: Interval) -> Interval:
        a, b = self.fn(iv[0]), self.fn(iv[1])
        return (a, b) if a <= b else (b, a)

    def sup_deriv(self, iv: Interval, grid: int = 33) -> float:
        xs = np.linspace(iv[0], iv[1], grid)
        return float(max(abs(self.deriv(float(x))) for x in xs))

    def check_monotone(self, iv: Interval, grid: int = 129) -> bool:
        xs = np.linspace(iv[0], iv[1], grid)
        ys = [self.fn(float(x)) for x in xs]
        d = np.diff(ys)
        return bool(np.all(d > 0) or np.all(d < 0))


class Gdms:
    """Edges indexed 0,1,2,...; labels are user-facing names (ints or tuples).

    pair_allowed restricts which label pairs may follow each other on top of
    the vertex-chaining rule dom(first) == img(second). locate maps a point of
    the ambient interval to the label of the branch whose image covers it.
    """

    def __init__(
        self,
        vertices: Sequence[Interval],
        edge_factory: Callable[[int], Branch],
        n_edges: int | None = None,
        *,
        pair_allowed: Callable[[object, object], bool] | None = None,
        locate: Callable[[float], object] | None = None,
        name: str = "custom",
    ):
        if not vertices:
            raise ConfigError("a system needs at least one vertex interval")
        self.vertices = [(float(lo), float(hi)) for lo, hi in vertices]
        for lo, hi in self.vertices:
            if not lo < hi:
                raise ConfigError(f"degenerate vertex interval ({lo}, {hi})")
        self._factory = edge_factory
        self.n_edges = n_edges
        self._edges: list[Branch] = []
        self._by_label: dict = {}
        self.pair_allowed = pair_allowed
        self.locate = locate
        self.name = name

    def edge(self, k: int) -> Branch:
        if self.n_edges is not None and k >= self.n_edges:
            raise ConfigError(f"edge index {k} beyond the {self.n_edges} edges of {self.name}")
        while len(self._edges) <= k:
            br = self._factory(len(self._edges))
            self._edges.append(br)
            self._by_label[br.label] = br
        return self._edges[k]

    def edges_up_to(self, N: int) -> list[Branch]:
        if self.n_edges is not None:
            N = min(N, self.n_edges)
        return [self.edge(k) for k in range(N)]

    def branch(self, label, probe: int = 4096) -> Branch:
        br = self._by_label.get(label)
        if br is not None:
            return br
        limit = self.n_edges if self.n_edges is not None else probe
        for k in range(len(self._edges), limit):
            br = self.edge(k)
            if br.label == label:
                return br
        raise ConfigError(f"no edge labeled {label!r} within the first {limit} edges")

    def domain_of(self, br: Branch) -> Interval:
        return self.vertices[br.dom]

    def admissible_pair(self, a: Branch, b: Branch) -> bool:
        if a.dom != b.img:
            return False
        if self.pair_allowed is not None:
            return bool(self.pair_allowed(a.label, b.label))
        return True

    def is_admissible_word(self, labels: Sequence) -> bool:
        brs = [self.branch(l) for l in labels]
        return all(self.admissible_pair(a, b) for a, b in zip(brs[:-1], brs[1:]))

    def shift_view(self, N: int) -> IncidenceMatrix:
        """Letter-level incidence on edge indices 0..N-1 for the shift machinery."""
        edges = self.edges_up_to(N)

        def pred(a: int, b: int) -> bool:
            return self.admissible_pair(edges[a], edges[b])

        full = all(pred(a, b) for a in range(min(len(edges), 8)) for b in range(min(len(edges), 8)))
        if full and self.pair_allowed is None and len({br.dom for br in edges} | {br.img for br in edges}) == 1:
            return IncidenceMatrix.full()
        return IncidenceMatrix(pred, name=f"{self.name}-edges")


class ParabolicSystem(Gdms):
    def __init__(self, base_kwargs: dict, parabolic: dict):
        """parabolic: label -> (fixed point, exponent guess or None)."""
        super().__init__(**base_kwargs)
        self.parabolic = {}
        for label, (x_fix, beta_e) in parabolic.items():
            br = self.branch(label)
            if abs(br.fn(x_fix) - x_fix) > 1e-9:
                raise ConfigError(f"edge {label!r}: {x_fix} is not fixed by its branch")
            if abs(abs(br.deriv(x_fix)) - 1.0) > 1e-10:
                raise ConfigError(
                    f"edge {label!r}: |derivative| at the fixed point is "
                    f"{abs(br.deriv(x_fix)):.12f}, not 1"
                )
            if not self.admissible_pair(br, br):
                raise ConfigError(f"parabolic edge {label!r} must be allowed to follow itself")
            self.parabolic[label] = (float(x_fix), beta_e)

    @property
    def omega(self) -> list:
        return list(self.parabolic)


def compose_word(S: Gdms, labels: Sequence) -> Callable[[float], float]:
    brs = [S.branch(l) for l in labels]

    def fn(x: float) -> float:
        for br in reversed(brs):
            x = br.fn(x)
        return x

    return fn


def compose_branch(S: Gdms, labels: Sequence):
    """Image interval and derivative range of the composed branch on its domain.

    The derivative range comes from chain-rule products at the domain interval
    endpoints and midpoint; for monotone derivatives this brackets the truth.
    """
    if not labels:
        raise WordLengthError("cannot compose the empty word")
    brs = [S.branch(l) for l in labels]
    for a, b in zip(brs[:-1], brs[1:]):
        if not S.admissible_pair(a, b):
            raise WordLengthError(f"inadmissible pair {a.label!r} -> {b.label!r}")
    lo, hi = S.domain_of(brs[-1])
    iv = (lo, hi)
    derivs = []
    for x in (lo, 0.5 * (lo + hi), hi):
        d = 1.0
        for br in reversed(brs):
            d *= abs(br.deriv(x))
            x = br.fn(x)
        derivs.append(d)
    for br in reversed(brs):
        iv = br.image_of(iv)
    return iv, (min(derivs), max(derivs))


def coding_point(S: Gdms, word, tol: float = 1e-13, max_letters: int = 2000) -> float:
    """Point coded by an infinite admissible word: the limit of nested images.

    word is an iterable of labels; it must keep yielding until the nested
    images contract below tol (wrap finite words with tail_extension first).
    """
    if tol <= 0:
        raise ConfigError("tol must be positive")
    it = iter(word)
    prefix: list[Branch] = []
    for count in range(1, max_letters + 1):
        try:
            br = S.branch(next(it))
        except StopIteration:
            raise WordLengthError(
                "word ended before the nested images contracted below tol"
            ) from None
        if prefix and not S.admissible_pair(prefix[-1], br):
            raise WordLengthError(f"inadmissible pair at position {count}")
        prefix.append(br)
        lo, hi = S.domain_of(br)
        iv = (lo, hi)
        for b in reversed(prefix):
            iv = b.image_of(iv)
        if iv[1] - iv[0] < tol:
            return 0.5 * (iv[0] + iv[1])
    raise ConvergenceError(
        f"images did not contract below {tol} within {max_letters} letters; "
        "parabolic systems need a jump transform first"
    )


def periodic_word(labels: Sequence):
    while True:
        yield from labels


def tail_extension(S: Gdms, labels: Sequence, probe: int = 256):
    """Infinite admissible word starting with labels.

    Repeats the word when the wrap-around pair is admissible, otherwise
    continues greedily with the lowest-index admissible edge.
    """
    brs = [S.branch(l) for l in labels]
    if S.admissible_pair(brs[-1], brs[0]):
        yield from periodic_word(labels)
        return
    yield from labels
    cur = brs[-1]
    while True:
        for k in range(probe):
            nxt = S.edge(k)
            if S.admissible_pair(cur, nxt):
                break
        else:
            raise ConvergenceError(f"no admissible continuation after {cur.label!r}")
        yield nxt.label
        cur = nxt


def gdms_map_apply(S: Gdms, x: float, xi: float | None = None, probe: int = 4096) -> float:
    """The expanding map: invert the unique branch whose image interior holds x.

    Points outside every image interior map to the preassigned point xi
    (default: the image of the first branch's left domain endpoint). A point
    on a shared image boundary raises BoundaryPointError.
    """
    if xi is None:
        e0 = S.edge(0)
        xi = e0.fn(S.domain_of(e0)[0])
    if S.locate is not None:
        label = S.locate(x)
        if label is None:
            return xi
        br = S.branch(label)
    else:
        br = None
        for cand in S.edges_up_to(probe):
            lo, hi = cand.image_of(S.domain_of(cand))
            if lo < x < hi:
                br = cand
                break
            if x == lo or x == hi:
                raise BoundaryPointError(f"{x} lies on the image boundary of edge {cand.label!r}")
        if br is None:
            return xi
    if br.inv is not None:
        return br.inv(x)
    lo, hi = S.domain_of(br)
    a, b = br.image_of((lo, hi))
    if not a <= x <= b:
        raise DomainError(f"{x} escaped the image of edge {br.label!r}")
    increasing = br.fn(hi) >= br.fn(lo)
    f = (lambda z: br.fn(z) - x) if increasing else (lambda z: x - br.fn(z))
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


@dataclass
class OscReport:
    edges_checked: int
    overlaps: list

    @property
    def ok(self) -> bool:
        return not self.overlaps


def verify_osc(S: Gdms, N: int, tol: float = 1e-12) -> OscReport:
    """Pairwise interior disjointness of branch images within each vertex."""
    edges = S.edges_up_to(N)
    by_img: dict[int, list] = {}
    for br in edges:
        iv = br.image_of(S.domain_of(br))
        by_img.setdefault(br.img, []).append((iv, br.label))
    overlaps = []
    for group in by_img.values():
        group.sort()
        reach, reach_label = -math.inf, None
        for iv, label in group:
            depth = reach - iv[0]
            if depth > tol:
                overlaps.append({"pair": (reach_label, label), "overlap": float(depth)})
            if iv[1] > reach:
                reach, reach_label = iv[1], label
    return OscReport(len(edges), overlaps)


@dataclass
class BdpReport:
    k_by_length: dict[int, float]
    k_est: float
    renyi_flagged: bool


def bdp_constant(
    S: Gdms,
    N: int,
    n_max: int = 8,
    grid: int = 9,
    *,
    words_per_length: int = 24,
    seed: int = 0,
) -> BdpReport:
    """Distortion constant: worst derivative ratio over sampled words and points.

    The flag trips when the per-length worst ratio keeps growing, the usual
    symptom of a neutral fixed point hiding in the alphabet.
    """
    from .rng import task_rng

    rng = task_rng(seed)
    edges = S.edges_up_to(N)
    if not edges:
        raise ConfigError("no edges to sample")
    k_by_length: dict[int, float] = {}
    for n in range(1, n_max + 1):
        worst = 1.0
        for _ in range(words_per_length):
            word = [edges[rng.integers(len(edges))]]
            for _ in range(n - 1):
                nxt = [b for b in edges if S.admissible_pair(word[-1], b)]
                if not nxt:
                    break
                word.append(nxt[rng.integers(len(nxt))])
            if len(word) < n:
                continue
            lo, hi = S.domain_of(word[-1])
            ds = []
            for x in np.linspace(lo, hi, grid):
                x = float(x)
                d = 1.0
                for br in reversed(word):
                    d *= abs(br.deriv(x))
                    x = br.fn(x)
                ds.append(d)
            lo_d, hi_d = min(ds), max(ds)
            if lo_d > 0:
                worst = max(worst, hi_d / lo_d)
        k_by_length[n] = worst
    ks = [k_by_length[n] for n in sorted(k_by_length)]
    flagged = len(ks) >= 4 and ks[-1] > 1.5 * ks[len(ks) // 2] and ks[-1] > 2.0
    return BdpReport(k_by_length, max(ks), flagged)


# ---------------------------------------------------------------------------
# built-in systems


def _moebius_branch(label, a, b, c, d, dom=0, img=0) -> Branch:
    det = a * d - b * c

    def fn(x: float) -> float:
        return (a * x + b) / (c * x + d)

    def deriv(x: float) -> float:
        return det / (c * x + d) ** 2

    def inv(y: float) -> float:
        return (d * y - b) / (a - c * y)

    return Branch(label, dom, img, fn, deriv, inv, kind="moebius",
                  params={"a": a, "b": b, "c": c, "d": d})


def _affine_branch(label, a, b, dom=0, img=0) -> Branch:
    return Branch(
        label, dom, img,
        fn=lambda x: a * x + b,
        deriv=lambda x: a,
        inv=lambda y: (y - b) / a,
        kind="affine",
        params={"a": a, "b": b},
    )


def gauss_cf() -> Gdms:
    """Inverse branches x -> 1/(x+n), n >= 1, of the continued-fraction map."""

    def factory(k: int) -> Branch:
        return _moebius_branch(k + 1, 0.0, 1.0, 1.0, float(k + 1))

    def locate(x: float):
        if x <= 0.0 or x > 1.0:
            return None
        r = 1.0 / x
        n = math.floor(r)
        if abs(r - round(r)) < 1e-13:
            raise BoundaryPointError(f"1/{x} is an integer: shared cell boundary")
        return n

    return Gdms([(0.0, 1.0)], factory, None, locate=locate, name="gauss-cf")


def backward_cf() -> ParabolicSystem:
    """Branches x -> 1/(i-x), i >= 2; the branch i=2 is neutral at x=1."""

    def factory(k: int) -> Branch:
        i = k + 2
        return _moebius_branch(i, 0.0, 1.0, -1.0, float(i))

    def locate(x: float):
        if x <= 0.0 or x >= 1.0:
            return None
        r = 1.0 / x
        if abs(r - round(r)) < 1e-13:
            raise BoundaryPointError(f"1/{x} is an integer: shared cell boundary")
        return math.floor(r) + 1

    base = dict(vertices=[(0.0, 1.0)], edge_factory=factory, n_edges=None,
                locate=locate, name="backward-cf")
    return ParabolicSystem(base, {2: (1.0, 1.0)})


def manneville_pomeau(alpha: float) -> ParabolicSystem:
    """Two inverse branches of x + x^(1+alpha) mod 1; branch 0 is neutral at 0."""
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    a1 = 1.0 + alpha
    x_star = float(brentq(lambda x: x + x**a1 - 1.0, 0.0, 1.0))

    def make(label: int, offset: float, lo: float, hi: float) -> Branch:
        def fn(y: float) -> float:
            target = min(max(y + offset, lo + lo**a1), hi + hi**a1)
            if target <= lo + lo**a1:
                return lo
            if target >= hi + hi**a1:
                return hi
            return float(brentq(lambda x: x + x**a1 - target, lo, hi,
                                xtol=1e-15, rtol=4 * np.finfo(float).eps))

        def deriv(y: float) -> float:
            x = fn(y)
            return 1.0 / (1.0 + a1 * x**alpha)

        def inv(x: float) -> float:
            return x + x**a1 - offset

        return Branch(label, 0, 0, fn, deriv, inv, kind="mp-branch",
                      params={"alpha": alpha, "offset": offset, "bracket": [lo, hi]})

    branches = [make(0, 0.0, 0.0, x_star), make(1, 1.0, x_star, 1.0)]

    def locate(x: float):
        if x <= 0.0 or x >= 1.0:
            return None
        if abs(x - x_star) < 1e-13:
            raise BoundaryPointError("point sits on the shared branch boundary")
        return 0 if x < x_star else 1

    base = dict(vertices=[(0.0, 1.0)], edge_factory=lambda k: branches[k],
                n_edges=2, locate=locate, name=f"manneville-pomeau-{alpha}")
    return ParabolicSystem(base, {0: (0.0, alpha)})


def luroth(cells: Sequence[Interval] | None = None) -> Gdms:
    if cells is not None:
        return gls(cells)

    def factory(k: int) -> Branch:
        n = k + 1
        return _affine_branch(n, 1.0 / (n * (n + 1)), 1.0 / (n + 1))

    def locate(x: float):
        if x <= 0.0 or x >= 1.0:
            return None
        r = 1.0 / x
        if abs(r - round(r)) < 1e-13:
            raise BoundaryPointError("cell boundary")
        return math.floor(r)

    return Gdms([(0.0, 1.0)], factory, None, locate=locate, name="luroth")


def gls(cells, n_edges: int | None = None) -> Gdms:
    """Affine system whose branch images are the given cells of [0,1)."""
    if callable(cells):
        cell_at = cells
    else:
        cell_list = [(float(lo), float(hi)) for lo, hi in cells]
        total = sum(hi - lo for lo, hi in cell_list)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"cells cover measure {total}, expected 1")
        n_edges = len(cell_list)
        cell_at = lambda k: cell_list[k]

        lefts = sorted((lo, hi, k) for k, (lo, hi) in enumerate(cell_list))

        def locate(x: float):
            for lo, hi, k in lefts:
                if lo < x < hi:
                    return k
                if x == lo or x == hi:
                    raise BoundaryPointError("cell boundary")
            return None

    def factory(k: int) -> Branch:
        lo, hi = cell_at(k)
        if not lo < hi:
            raise ConfigError(f"cell {k} is degenerate")
        return _affine_branch(k, hi - lo, lo)

    loc = locate if not callable(cells) else None
    return Gdms([(0.0, 1.0)], factory, n_edges, locate=loc, name="gls")


def affine_system(slope_offset_pairs: Sequence[tuple[float, float]]) -> Gdms:
    """Branches x -> a x + b on [0,1]; the workhorse for Moran-type examples."""
    pairs = [(float(a), float(b)) for a, b in slope_offset_pairs]
    for a, b in pairs:
        if not 0 < abs(a) < 1:
            raise ConfigError(f"slope {a} is not a contraction")

    def factory(k: int) -> Branch:
        a, b = pairs[k]
        return _affine_branch(k, a, b)

    return Gdms([(0.0, 1.0)], factory, len(pairs), name="affine")


# ---------------------------------------------------------------------------
# parabolic machinery


class JumpSystem(Gdms):
    """Derived alphabet: runs i^n of a parabolic letter fused with their exit j.

    Labels are tuples of original labels; untouched hyperbolic edges keep
    their original label wrapped as a 1-tuple. Two derived letters may follow
    each other exactly when the concatenated original word is admissible,
    which reduces to the original rule on (last of first, first of second).
    """

    def __init__(self, P: ParabolicSystem, n_cap: int = 1024):
        self.original = P
        self.n_cap = n_cap
        omega = set(P.omega)

        def orig_pair(a_label, b_label) -> bool:
            return P.admissible_pair(P.branch(a_label), P.branch(b_label))

        def pair_allowed(a: tuple, b: tuple) -> bool:
            return orig_pair(a[-1], b[0])

        gen = self._enumerate(P, omega)
        store: list[Branch] = []

        def factory(k: int) -> Branch:
            while len(store) <= k:
                store.append(next(gen))
            return store[k]

        finite = P.n_edges is not None
        n_edges = None
        if finite:
            n_hyp = sum(
                1 for k in range(P.n_edges) if P.edge(k).label not in omega
            )
            per_par = {}
            for i in omega:
                js = [
                    P.edge(k).label
                    for k in range(P.n_edges)
                    if P.edge(k).label != i and orig_pair(i, P.edge(k).label)
                ]
                per_par[i] = n_cap if js else 0
            n_edges = n_hyp + sum(per_par.values())
        super().__init__(
            P.vertices, factory, n_edges, pair_allowed=pair_allowed,
            name=f"jump({P.name})",
        )

    def _enumerate(self, P: ParabolicSystem, omega: set):
        emitted = {i: 0 for i in omega}
        hyp_cursor = 0
        r = 0
        idle = 0
        while True:
            r += 1
            produced = False
            # next untouched hyperbolic edge, in original order
            while True:
                if P.n_edges is not None and hyp_cursor >= P.n_edges:
                    break
                br = P.edge(hyp_cursor)
                hyp_cursor += 1
                if br.label not in omega:
                    yield Branch(
                        (br.label,), br.dom, br.img, br.fn, br.deriv, br.inv,
                        kind=br.kind, params=br.params,
                    )
                    produced = True
                    break
            # derived run edges along the diagonal n + j_rank = r
            for i in sorted(omega, key=repr):
                if emitted[i] >= self.n_cap:
                    continue
                js = self._exits(P, i, r)
                for n in range(1, r + 1):
                    j_rank = r - n
                    if j_rank >= len(js):
                        continue
                    if emitted[i] >= self.n_cap:
                        break
                    yield self._derived(P, i, n, js[j_rank])
                    emitted[i] += 1
                    produced = True
            idle = 0 if produced else idle + 1
            if idle > 4:
                return

    @staticmethod
    def _exits(P: ParabolicSystem, i, count: int) -> list:
        """First `count` labels j != i with ij admissible, in edge order."""
        out = []
        k = 0
        br_i = P.branch(i)
        while len(out) < count:
            if P.n_edges is not None and k >= P.n_edges:
                break
            br = P.edge(k)
            k += 1
            if br.label != i and P.admissible_pair(br_i, br):
                out.append(br.label)
        return out

    @staticmethod
    def _derived(P: ParabolicSystem, i, n: int, j) -> Branch:
        bi, bj = P.branch(i), P.branch(j)

        def fn(x: float) -> float:
            x = bj.fn(x)
            for _ in range(n):
                x = bi.fn(x)
            return x

        def deriv(x: float) -> float:
            d = bj.deriv(x)
            x = bj.fn(x)
            for _ in range(n):
                d *= bi.deriv(x)
                x = bi.fn(x)
            return d

        def inv(y: float) -> float:
            for _ in range(n):
                y = bi.inv(y)
            return bj.inv(y)

        has_inv = bi.inv is not None and bj.inv is not None
        return Branch(
            (i,) * n + (j,), bj.dom, bi.img, fn, deriv,
            inv if has_inv else None, kind="jump-run",
            params={"i": i, "j": j, "n": n},
        )

    def word_of(self, label: tuple) -> tuple:
        return label


def jump_transform(P: ParabolicSystem, n_cap: int = 1024, *, check: bool = True) -> JumpSystem:
    """Hyperbolic system over the run alphabet; spot-checks contraction."""
    J = JumpSystem(P, n_cap)
    if check:
        probe = [J.edge(k) for k in range(min(24, n_cap))]
        for br in probe:
            bound = br.sup_deriv(J.domain_of(br), grid=9)
            if bound >= 1.0:
                raise ConvergenceError(
                    f"derived branch {br.label!r} has derivative bound {bound:.4f} >= 1; "
                    "is the parabolic set mislabeled?"
                )
    return J


@dataclass
class JumpContractionReport:
    per_run: dict
    worst: float
    all_contracting: bool


def jump_contraction_report(
    P: ParabolicSystem, n_cap: int = 1024, grid: int = 17, exits_per_letter: int = 8
) -> JumpContractionReport:
    """Contraction bounds for every run edge i^n j, n <= n_cap, in one orbit pass.

    Shares the orbit of phi_i across all n, so the cost is grid * n_cap branch
    evaluations per (i, j) instead of the quadratic direct sweep.
    """
    per_run: dict = {}
    worst = 0.0
    for i in P.omega:
        bi = P.branch(i)
        for j in JumpSystem._exits(P, i, exits_per_letter):
            bj = P.branch(j)
            lo, hi = P.domain_of(bj)
            bounds = np.zeros(n_cap)
            for y0 in np.linspace(lo, hi, grid):
                x = bj.fn(float(y0))
                logd = math.log(abs(bj.deriv(float(y0))))
                for n in range(1, n_cap + 1):
                    logd += math.log(abs(bi.deriv(x)))
                    x = bi.fn(x)
                    bounds[n - 1] = max(bounds[n - 1], math.exp(logd))
            per_run[(i, j)] = bounds
            worst = max(worst, float(bounds.max()))
    return JumpContractionReport(per_run, worst, worst < 1.0)


@dataclass
class ParabolicFit:
    slope: float
    beta_implied: float
    spread: float
    residual: float
    n_values: list[int]
    mean_logs: list[float]


def parabolic_asymptotics(
    P: ParabolicSystem,
    i,
    n_range: Sequence[int],
    *,
    z_samples: int = 5,
    beta_expected: float | None = None,
    max_residual: float = 0.2,
) -> ParabolicFit:
    """Decay rate of |d/dz phi_i^n(z)| for z off the neutral fixed point.

    Fits log|derivative| against log n by least squares; the model exponent
    -(beta+1)/beta then gives the implied beta. The spread is the max/min
    ratio of derivative * n^exponent across all samples and n, using the
    expected beta when supplied (the fitted one otherwise).
    """
    n_range = sorted(set(int(n) for n in n_range))
    if len(n_range) < 3:
        raise ConfigError("need at least three n values to fit a slope")
    n_max = n_range[-1]
    bi = P.branch(i)

    zs = []
    k = 0
    while len(zs) < z_samples:
        if P.n_edges is not None and k >= P.n_edges:
            break
        br = P.edge(k)
        k += 1
        if br.label == i or not P.admissible_pair(bi, br):
            continue
        lo, hi = br.image_of(P.domain_of(br))
        zs.extend([lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)])
    zs = zs[:z_samples] if len(zs) >= z_samples else zs
    if not zs:
        raise ConfigError(f"no admissible exits from parabolic letter {i!r}")

    wanted = set(n_range)
    logs = np.zeros((len(zs), len(n_range)))
    for col, z in enumerate(zs):
        x = float(z)
        logd = 0.0
        pos = 0
        for n in range(1, n_max + 1):
            logd += math.log(abs(bi.deriv(x)))
            x = bi.fn(x)
            if n in wanted:
                logs[col, pos] = logd
                pos += 1

    mean_logs = logs.mean(axis=0)
    ln_n = np.log(np.array(n_range, dtype=float))
    slope, intercept = np.polyfit(ln_n, mean_logs, 1)
    resid = float(np.sqrt(np.mean((mean_logs - (slope * ln_n + intercept)) ** 2)))
    if resid > max_residual:
        raise ConvergenceError(
            f"log-log fit residual {resid:.3f} exceeds {max_residual}; "
            "the decay is not a clean power law on this range"
        )
    if slope >= -1.0:
        raise ConvergenceError(f"slope {slope:.3f} >= -1 implies no finite exponent")
    beta_implied = -1.0 / (1.0 + slope)
    exponent = (
        (beta_expected + 1.0) / beta_expected if beta_expected is not None
        else -float(slope)
    )
    ratios = np.exp(logs) * np.power(
        np.array(n_range, dtype=float), exponent
    )[None, :]
    spread = float(ratios.max() / ratios.min())
    return ParabolicFit(
        float(slope), float(beta_implied), spread, resid,
        list(n_range), [float(v) for v in mean_logs],
    )


# ---------------------------------------------------------------------------
# geometric potentials on the edge alphabet


class _GeometricPotential(Potential):
    """t * log|phi'_(first letter)| at the tail coding point, plus optional
    q * (theta - P(theta)). Uses every letter handed to it, not just the
    declared memory window, so longer words sharpen the tail point."""

    def __init__(self, S: Gdms, t: float, q: float, theta: Potential | None,
                 p_theta: float, memory: int, tol: float):
        self.system = S
        self.t = float(t)
        self.q = float(q)
        self.theta = theta
        self.p_theta = float(p_theta)
        self.tol = tol
        mem = memory if theta is None else max(memory, theta.memory)
        super().__init__(self._eval, memory=mem, label="geometric",
                         params={"t": t, "q": q, "p_theta": p_theta})
        self._full_cache: dict[tuple, float] = {}

    def value(self, word: Sequence[int]) -> float:
        if len(word) < self.memory:
            raise WordLengthError(
                f"word of length {len(word)} shorter than memory {self.memory}"
            )
        key = tuple(word)
        v = self._full_cache.get(key)
        if v is None:
            v = self._eval(key)
            self._full_cache[key] = v
        return v

    def _eval(self, word: tuple) -> float:
        S = self.system
        first = S.edge(word[0])
        out = 0.0
        if self.t != 0.0:
            tail = word[1:] if len(word) > 1 else word
            labels = [S.edge(k).label for k in tail]
            x = coding_point(S, tail_extension(S, labels), tol=self.tol)
            out += self.t * math.log(abs(first.deriv(x)))
        if self.q != 0.0:
            th = self.theta.value(word[: self.theta.memory]) if self.theta else 0.0
            out += self.q * (th - self.p_theta)
        return out

    def sup_over_letter(self, e: int, N: int, A) -> float:
        br = self.system.edge(e)
        lo, hi = self.system.domain_of(br)
        xs = np.linspace(lo, hi, 33)
        vals = self.t * np.log(np.abs([br.deriv(float(x)) for x in xs]))
        out = float(vals.max())
        if self.q != 0.0:
            if self.theta is None:
                out += self.q * (-self.p_theta)
            elif self.theta.memory == 1:
                out += self.q * (self.theta.value((e,)) - self.p_theta)
            else:
                return super().sup_over_letter(e, N, A)
        return out


def geometric_potential(
    S: Gdms,
    t: float,
    q: float = 0.0,
    theta: Potential | None = None,
    p_theta: float = 0.0,
    *,
    memory: int = 1,
    truncation: int | None = None,
    tol: float = 1e-14,
) -> Potential:
    if q != 0.0 and theta is None and p_theta == 0.0:
        raise ConfigError("q != 0 needs a theta potential (or an explicit p_theta)")
    del truncation  # the potential itself is truncation-agnostic
    return _GeometricPotential(S, t, q, theta, p_theta, memory, tol)


# ---------------------------------------------------------------------------
# declarative construction


def _branch_from_config(e: dict) -> Branch:
    label = e["label"]
    if isinstance(label, list):
        label = tuple(label)
    dom = int(e.get("source", 0))
    img = int(e.get("target", 0))
    kind = e["kind"]
    p = e.get("params", {})
    if kind == "affine":
        return _affine_branch(label, float(p["a"]), float(p["b"]), dom, img)
    if kind == "moebius":
        return _moebius_branch(label, float(p["a"]), float(p["b"]),
                               float(p["c"]), float(p["d"]), dom, img)
    if kind == "mp-branch":
        alpha = float(p["alpha"])
        offset = float(p.get("offset", 0.0))
        lo, hi = p["bracket"]
        a1 = 1.0 + alpha

        def fn(y: float, lo=float(lo), hi=float(hi)) -> float:
            target = min(max(y + offset, lo + lo**a1), hi + hi**a1)
            if target <= lo + lo**a1:
                return lo
            if target >= hi + hi**a1:
                return hi
            return float(brentq(lambda x: x + x**a1 - target, lo, hi,
                                xtol=1e-15, rtol=4 * np.finfo(float).eps))

        def deriv(y: float) -> float:
            x = fn(y)
            return 1.0 / (1.0 + a1 * x**alpha)

        return Branch(label, dom, img, fn, deriv,
                      inv=lambda x: x + x**a1 - offset,
                      kind="mp-branch", params=dict(p))
    raise ConfigError(f"unknown branch kind {kind!r}")


_BUILTINS = {
    "gauss_cf": lambda cfg: gauss_cf(),
    "backward_cf": lambda cfg: backward_cf(),
    "manneville_pomeau": lambda cfg: manneville_pomeau(float(cfg["alpha"])),
    "luroth": lambda cfg: luroth(cfg.get("cells")),
    "gls": lambda cfg: gls(cfg["cells"]),
    "affine": lambda cfg: affine_system(cfg["branches"]),
}


def system_from_config(cfg: dict) -> Gdms:
    """{"builtin": name, ...} or explicit {vertices, edges, parabolic}."""
    if not isinstance(cfg, dict):
        raise ConfigError("system config must be an object")
    if "builtin" in cfg:
        name = cfg["builtin"]
        if name not in _BUILTINS:
            raise ConfigError(f"unknown builtin system {name!r}")
        S = _BUILTINS[name](cfg)
        if "jump" in cfg:
            if not isinstance(S, ParabolicSystem):
                raise ConfigError(f"builtin {name!r} has no parabolic structure to jump")
            S = jump_transform(S, n_cap=int(cfg["jump"].get("n_cap", 1024)))
        return S
    try:
        vertices = [tuple(iv) for iv in cfg["vertices"]]
        edge_cfgs = cfg["edges"]
    except KeyError as missing:
        raise ConfigError(f"system config lacks {missing}") from None
    branches = [_branch_from_config(e) for e in edge_cfgs]
    labels = [br.label for br in branches]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate edge labels")
    forbidden = {tuple(p) for p in cfg.get("forbidden_pairs", [])}
    pair = (lambda a, b: (a, b) not in forbidden) if forbidden else None
    base = dict(
        vertices=vertices,
        edge_factory=lambda k: branches[k],
        n_edges=len(branches),
        pair_allowed=pair,
        name=cfg.get("name", "config"),
    )
    parab_labels = cfg.get("parabolic", [])
    if not parab_labels:
        return Gdms(**base)
    parab = {}
    for entry in parab_labels:
        if isinstance(entry, dict):
            label, x_fix = entry["label"], float(entry["fixed_point"])
            beta_e = entry.get("beta")
        else:
            label, x_fix, beta_e = entry, None, None
        if x_fix is None:
            br = next(b for b in branches if b.label == label)
            lo, hi = vertices[br.dom]
            x_fix = float(brentq(lambda x: br.fn(x) - x, lo, hi))
        parab[label] = (x_fix, beta_e)
    return ParabolicSystem(base, parab)
