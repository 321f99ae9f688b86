"""One-sided shift spaces over truncated countable alphabets.

Letters are nonnegative integers; a truncation keeps letters 0..N-1 and all
computations happen on the truncated shift. Countable systems are handled by
sweeping the truncation and watching the pressure stabilize. Words are plain
tuples of letters. Potentials are locally constant with a declared memory m:
the value on a word depends only on its first m letters, which makes Birkhoff
sums over cylinders exact and turns the Ruelle operator into a finite weighted
matrix on admissible m-words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    NotIrreducibleError,
    WordLengthError,
)
from .rng import task_rng

Word = tuple


@dataclass(frozen=True)
class Alphabet:
    """Truncation window into the countable alphabet {0, 1, 2, ...}."""

    truncation: int

    def __post_init__(self):
        if self.truncation < 1:
            raise ConfigError("alphabet truncation must be >= 1")

    def letters(self) -> range:
        return range(self.truncation)


class IncidenceMatrix:
    """0/1 transition rule on letter pairs.

    A predicate of None means the full shift (every transition allowed),
    which lets hot paths skip per-pair checks entirely.
    """

    def __init__(self, pred: Callable[[int, int], bool] | None = None, *, name: str = "custom"):
        self._pred = pred
        self.name = name

    @property
    def is_full(self) -> bool:
        return self._pred is None

    def allows(self, a: int, b: int) -> bool:
        if self._pred is None:
            return True
        return bool(self._pred(a, b))

    def __repr__(self):
        return f"IncidenceMatrix({self.name})"

    @staticmethod
    def full() -> "IncidenceMatrix":
        return IncidenceMatrix(None, name="full")

    @staticmethod
    def golden_mean() -> "IncidenceMatrix":
        """Two letters {0,1} with the word 11 forbidden (and 1->1 for any larger N)."""
        return IncidenceMatrix(lambda a, b: not (a == 1 and b == 1), name="golden-mean")

    @staticmethod
    def from_forbidden_pairs(pairs: Iterable[Sequence[int]], name: str = "forbidden-pairs") -> "IncidenceMatrix":
        forb = frozenset((int(a), int(b)) for a, b in pairs)
        return IncidenceMatrix(lambda a, b: (a, b) not in forb, name=name)

    def submatrix(self, N: int) -> np.ndarray:
        out = np.ones((N, N), dtype=bool)
        if self._pred is not None:
            for a in range(N):
                for b in range(N):
                    out[a, b] = self._pred(a, b)
        return out

    def find_witnesses(self, N: int, max_len: int = 8) -> dict:
        """Connecting word gamma with a+gamma+b admissible, for every letter pair.

        Raises NotIrreducibleError when some pair has no connector of length
        <= max_len within the truncation.
        """
        adj = self.submatrix(N)
        # BFS shortest paths from each source letter.
        witnesses: dict[tuple[int, int], tuple] = {}
        missing = []
        for a in range(N):
            parent = {a: None}
            frontier = [a]
            depth = 0
            reached_at = {}
            while frontier and depth <= max_len:
                nxt = []
                for u in frontier:
                    for v in np.flatnonzero(adj[u]):
                        v = int(v)
                        if v not in parent:
                            parent[v] = u
                            nxt.append(v)
                            reached_at[v] = depth + 1
                frontier = nxt
                depth += 1
            for b in range(N):
                if adj[a, b]:
                    witnesses[(a, b)] = ()
                    continue
                if b == a:
                    # the BFS never revisits its source, so close the loop
                    # through the nearest reached predecessor of a
                    preds = [v for v in reached_at if adj[v, a]]
                    if not preds:
                        missing.append((a, b))
                        continue
                    v = min(preds, key=reached_at.get)
                    path = [v]
                    while path[-1] != a:
                        path.append(parent[path[-1]])
                    path.reverse()
                    witnesses[(a, b)] = tuple(path[1:])
                    continue
                if b in reached_at:
                    # unwind the path a -> ... -> b; the connector is the interior
                    path = [b]
                    while path[-1] != a:
                        path.append(parent[path[-1]])
                    path.reverse()
                    witnesses[(a, b)] = tuple(path[1:-1])
                else:
                    missing.append((a, b))
        if missing:
            raise NotIrreducibleError(
                f"no connecting word of length <= {max_len} for pairs {missing[:8]}"
                + ("..." if len(missing) > 8 else "")
            )
        return witnesses


def is_admissible(word: Sequence[int], A: IncidenceMatrix) -> bool:
    """True when every consecutive letter pair is allowed."""
    if len(word) == 0:
        raise WordLengthError("admissibility needs a nonempty word")
    if A.is_full:
        return True
    return all(A.allows(word[k], word[k + 1]) for k in range(len(word) - 1))


def enumerate_cylinders(n: int, N: int, A: IncidenceMatrix, cap: int = 2_000_000) -> list[Word]:
    """All admissible words of length n over letters 0..N-1, lexicographic.

    Raises BudgetError when the count would exceed cap.
    """
    if n < 1:
        raise WordLengthError("cylinder length must be >= 1")
    out: list[Word] = []
    stack: list[Word] = [(e,) for e in reversed(range(N))]
    while stack:
        w = stack.pop()
        if len(w) == n:
            out.append(w)
            if len(out) > cap:
                raise BudgetError(f"cylinder enumeration exceeded cap {cap}")
            continue
        last = w[-1]
        for e in reversed(range(N)):
            if A.is_full or A.allows(last, e):
                stack.append(w + (e,))
    return out


class Potential:
    """Locally constant potential with declared memory m and Holder exponent.

    value(word) reads only the first m letters. letter_sup, when provided,
    gives sup of the potential over the length-1 cylinder [e] in closed form
    (used for summability over countable alphabets).
    """

    def __init__(
        self,
        fn: Callable[[Word], float],
        memory: int = 1,
        *,
        holder_beta: float = 1.0,
        letter_sup: Callable[[int], float] | None = None,
        label: str = "custom",
        params: dict | None = None,
    ):
        if memory < 1:
            raise ConfigError("potential memory must be >= 1")
        self.memory = int(memory)
        self.holder_beta = float(holder_beta)
        self.label = label
        self.params = params or {}
        self._fn = fn
        self._letter_sup = letter_sup
        self._cache: dict[Word, float] = {}

    def value(self, word: Sequence[int]) -> float:
        if len(word) < self.memory:
            raise WordLengthError(
                f"word of length {len(word)} shorter than memory {self.memory}"
            )
        key = tuple(word[: self.memory])
        v = self._cache.get(key)
        if v is None:
            v = float(self._fn(key))
            self._cache[key] = v
        return v

    def sup_over_letter(self, e: int, N: int, A: IncidenceMatrix) -> float:
        """sup of the potential over the cylinder [e], exact for this truncation."""
        if self._letter_sup is not None:
            return float(self._letter_sup(e))
        if self.memory == 1:
            return self.value((e,))
        best = -math.inf
        stack: list[Word] = [(e,)]
        while stack:
            w = stack.pop()
            if len(w) == self.memory:
                best = max(best, self.value(w))
                continue
            for b in range(N):
                if A.is_full or A.allows(w[-1], b):
                    stack.append(w + (b,))
        return best

    @staticmethod
    def constant(c: float) -> "Potential":
        return Potential(lambda w: c, memory=1, letter_sup=lambda e: c,
                         label="constant", params={"value": float(c)})

    @staticmethod
    def memory1(values) -> "Potential":
        """Per-letter table: list/array, dict, or callable letter -> value."""
        if callable(values):
            fn = values
            return Potential(lambda w: fn(w[0]), memory=1, label="memory1-table")
        if isinstance(values, dict):
            table = {int(k): float(v) for k, v in values.items()}
            return Potential(lambda w: table[w[0]], memory=1,
                             label="memory1-table", params={"table": table})
        arr = [float(v) for v in values]
        return Potential(lambda w: arr[w[0]], memory=1,
                         label="memory1-table", params={"values": arr})

    @staticmethod
    def memory2(table) -> "Potential":
        """Pair table: dict[(a,b)] -> value, 2D array, or callable (a,b) -> value."""
        if callable(table):
            return Potential(lambda w: table(w[0], w[1]), memory=2, label="memory2-table")
        if isinstance(table, dict):
            tbl = {(int(a), int(b)): float(v) for (a, b), v in table.items()}
            return Potential(lambda w: tbl[(w[0], w[1])], memory=2,
                             label="memory2-table", params={"table": tbl})
        arr = np.asarray(table, dtype=float)
        return Potential(lambda w: float(arr[w[0], w[1]]), memory=2,
                         label="memory2-table", params={"values": arr.tolist()})

    @staticmethod
    def from_config(cfg: dict) -> "Potential":
        """Build from the declarative JSON form used by the CLI."""
        try:
            kind = cfg["type"]
        except (KeyError, TypeError):
            raise ConfigError("potential config needs a 'type' field")
        if kind == "constant":
            return Potential.constant(float(cfg["value"]))
        if kind == "memory1-table":
            if "table" in cfg:
                return Potential.memory1({int(k): v for k, v in cfg["table"].items()})
            return Potential.memory1(cfg["values"])
        if kind == "memory2-table":
            if "table" in cfg:
                tbl = {}
                for key, v in cfg["table"].items():
                    a, b = key.split(",")
                    tbl[(int(a), int(b))] = float(v)
                return Potential.memory2(tbl)
            return Potential.memory2(cfg["values"])
        if kind == "geometric":
            from . import gdms as _gdms

            system = _gdms.system_from_config(cfg["system"])
            theta = Potential.from_config(cfg["theta"]) if "theta" in cfg else None
            return _gdms.geometric_potential(
                system,
                t=float(cfg.get("t", 1.0)),
                q=float(cfg.get("q", 0.0)),
                theta=theta,
                p_theta=float(cfg.get("p_theta", 0.0)),
                memory=int(cfg.get("memory", 1)),
            )
        raise ConfigError(f"unknown potential type {kind!r}")


def birkhoff_sum(psi: Potential, word: Sequence[int], n: int) -> float:
    """S_n psi along the cylinder word; needs len(word) >= n + memory - 1."""
    m = psi.memory
    if len(word) < n + m - 1:
        raise WordLengthError(
            f"need {n + m - 1} letters for an order-{n} Birkhoff sum of a memory-{m} potential"
        )
    return float(sum(psi.value(word[k: k + m]) for k in range(n)))


@dataclass
class SummabilityReport:
    truncations: list[int]
    partial_sums: list[float]
    last_relative_increment: float
    converged: bool

    @property
    def verdict(self) -> str:
        return "converged" if self.converged else "not summable at this truncation"


def summability_report(
    psi: Potential,
    N: int,
    A: IncidenceMatrix | None = None,
    *,
    schedule: Sequence[int] | None = None,
    rel_tol: float = 1e-3,
) -> SummabilityReport:
    """Partial sums of sum_e exp(sup psi|[e]) over growing truncations."""
    A = A or IncidenceMatrix.full()
    if schedule is None:
        schedule = []
        k = 32
        while k < N:
            schedule.append(k)
            k *= 2
        schedule.append(N)
        schedule = sorted(set(schedule))
    sums = []
    total = 0.0
    prev = 0
    for nk in schedule:
        for e in range(prev, nk):
            s = psi.sup_over_letter(e, N, A)
            if s > -math.inf:
                total += math.exp(s)
        prev = nk
        sums.append(total)
    if len(sums) >= 2 and sums[-1] > 0:
        inc = (sums[-1] - sums[-2]) / sums[-1]
    else:
        inc = 0.0 if len(sums) < 2 else math.inf
    return SummabilityReport(list(schedule), sums, inc, converged=(inc < rel_tol))


# ---------------------------------------------------------------------------
# state machinery: admissible m-words as the vertices of a weighted digraph


def _state_graph(psi: Potential, A: IncidenceMatrix, N: int, state_cap: int):
    """States (admissible m-words), their psi values, and the transition CSR."""
    m = psi.memory
    states = enumerate_cylinders(m, N, A, cap=state_cap)
    index = {w: i for i, w in enumerate(states)}
    psi_vals = np.array([psi.value(w) for w in states], dtype=float)
    rows, cols = [], []
    for i, u in enumerate(states):
        suffix = u[1:]
        last = u[-1]
        for e in range(N):
            if A.is_full or A.allows(last, e):
                j = index.get(suffix + (e,))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
    S = len(states)
    adj = sp.csr_matrix(
        (np.ones(len(rows)), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(S, S),
    )
    return states, index, psi_vals, adj


def _segment_max(values: np.ndarray, indptr: np.ndarray, S: int) -> np.ndarray:
    # reduceat corrupts segments that precede empty trailing rows, so use .at
    out = np.full(S, -np.inf)
    rows = np.repeat(np.arange(S), np.diff(indptr))
    np.maximum.at(out, rows, values)
    return out


@dataclass
class PressureEstimate:
    """Per-level values (1/n) log Lambda_n for n = memory..n_max plus extrapolation."""

    levels: list[float]
    n_start: int
    value: float
    truncation: int
    memory: int
    gap: float

    @property
    def n_max(self) -> int:
        return self.n_start + len(self.levels) - 1

    def level(self, n: int) -> float:
        return self.levels[n - self.n_start]


def _aitken(levels: Sequence[float]) -> float:
    a0, a1, a2 = levels[-3], levels[-2], levels[-1]
    denom = (a2 - a1) - (a1 - a0)
    if abs(denom) < 1e-14 * max(1.0, abs(a2)):
        return a2
    return a2 - (a2 - a1) ** 2 / denom


def pressure(
    psi: Potential,
    A: IncidenceMatrix,
    N: int,
    n_max: int = 10,
    *,
    state_cap: int = 200_000,
) -> PressureEstimate:
    """Topological pressure via level sums Lambda_n = sum_{|w|=n} exp(sup S_n psi|[w]).

    The sup over a cylinder is exact for locally constant psi: the last m-1
    Birkhoff terms are maximized over admissible extensions by dynamic
    programming. Per-level values are (1/n) log Lambda_n; the returned value
    is the last level plus an Aitken delta-squared correction from the final
    three levels. All accumulation is scaled/log-space.
    """
    m = psi.memory
    if n_max < m:
        raise ConfigError(f"n_max={n_max} below potential memory {m}")

    if A.is_full and m == 1:
        # Lambda_n = (sum_e e^psi(e))^n exactly: every level equals log-sum-exp.
        vals = np.array([psi.value((e,)) for e in range(N)])
        top = vals.max()
        lse = top + math.log(np.exp(vals - top).sum())
        levels = [lse] * (n_max - m + 1)
        return PressureEstimate(levels, m, lse, N, m, 0.0)

    states, _, psi_vals, adj = _state_graph(psi, A, N, state_cap)
    S = len(states)
    if S == 0:
        raise ConvergenceError("no admissible states at this truncation")
    adj_t = adj.T.tocsr()

    # tail(u): max over admissible m-1 step extensions of the trailing Birkhoff terms
    tail = np.zeros(S)
    for _ in range(m - 1):
        contrib = psi_vals[adj.indices] + tail[adj.indices]
        tail = _segment_max(contrib, adj.indptr, S)

    psi_top = psi_vals.max()
    w = np.exp(psi_vals - psi_top)

    vec = w.copy()
    shift = psi_top
    tail_top = tail.max()
    if not np.isfinite(tail_top):
        raise ConvergenceError("every state is a dead end at this truncation")
    tail_w = np.exp(tail - tail_top)

    levels = []
    for n in range(m, n_max + 1):
        if n > m:
            vec = adj_t @ vec
            vec *= w
            mx = float(vec.max())
            if mx <= 0.0 or not np.isfinite(mx):
                raise ConvergenceError(f"cylinder weights vanished at level n={n}")
            vec /= mx
            shift += math.log(mx) + psi_top
        lam = float(vec @ tail_w)
        if lam <= 0.0:
            raise ConvergenceError(f"no extendable cylinders at level n={n}")
        levels.append((shift + tail_top + math.log(lam)) / n)

    value = _aitken(levels) if len(levels) >= 3 else levels[-1]
    gap = abs(levels[-1] - levels[-2]) if len(levels) >= 2 else 0.0
    return PressureEstimate(levels, m, value, N, m, gap)


@dataclass
class EigenData:
    """Leading eigendata of the weighted transition matrix on m-word states.

    matrix holds M_scaled with M = exp(scale) * M_scaled; log_rho is the log of
    the true leading eigenvalue (the pressure). nu sums to 1 and nu . h = 1.
    """

    states: list[Word]
    index: dict
    log_rho: float
    rho_scaled: float
    scale: float
    h: np.ndarray
    nu: np.ndarray
    psi_vals: np.ndarray
    matrix: sp.csr_matrix
    residual: float
    iterations: int
    memory: int
    truncation: int


def _power_iteration(M: sp.csr_matrix, tol: float, max_iter: int):
    S = M.shape[0]
    x = np.full(S, 1.0 / S)
    shift = 0.5 * float(M.data.max()) if M.nnz else 1.0
    lam_prev = None
    its = 0
    for its in range(1, max_iter + 1):
        y = M @ x + shift * x
        lam = float(y.sum())
        if lam <= 0 or not np.isfinite(lam):
            raise ConvergenceError("power iteration left the positive cone")
        y /= lam
        delta = float(np.abs(y - x).max())
        x = y
        if lam_prev is not None and abs(lam - lam_prev) < tol * lam and delta < 100 * tol:
            lam_prev = lam
            break
        lam_prev = lam
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    rho = lam_prev - shift
    return rho, x, its


def rpf_eigendata(
    psi: Potential,
    A: IncidenceMatrix,
    N: int,
    *,
    tol: float = 1e-13,
    max_iter: int = 10**6,
    state_cap: int = 200_000,
) -> EigenData:
    """Leading (rho, h, nu) for M[u -> w] = exp(psi(u + last(w))).

    For a memory-m potential the weight reduces to exp(psi(u)) on every
    admissible transition out of u. Requires the truncated state graph to be
    strongly connected.
    """
    states, index, psi_vals, adj = _state_graph(psi, A, N, state_cap)
    S = len(states)
    if S == 0:
        raise ConvergenceError("no admissible states at this truncation")
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if ncomp != 1:
        raise NotIrreducibleError(
            f"state graph has {ncomp} strongly connected components at truncation {N}"
        )

    scale = float(psi_vals.max())
    weights = np.exp(psi_vals - scale)
    rows = np.repeat(np.arange(S), np.diff(adj.indptr))
    M = sp.csr_matrix((weights[rows], adj.indices.copy(), adj.indptr.copy()), shape=(S, S))

    rho_s, h, its_r = _power_iteration(M, tol, max_iter)
    Mt = M.T.tocsr()
    rho_l, nu, its_l = _power_iteration(Mt, tol, max_iter)

    nu = nu / nu.sum()
    h = h / float(nu @ h)
    resid_r = float(np.abs(M @ h - rho_s * h).max()) / rho_s
    resid_l = float(np.abs(Mt @ nu - rho_l * nu).max()) / rho_l
    return EigenData(
        states=states,
        index=index,
        log_rho=scale + math.log(rho_s),
        rho_scaled=rho_s,
        scale=scale,
        h=h,
        nu=nu,
        psi_vals=psi_vals,
        matrix=M,
        residual=max(resid_r, resid_l),
        iterations=its_r + its_l,
        memory=psi.memory,
        truncation=N,
    )


class GibbsMarkovMeasure:
    """Stationary Markov chain on m-word states realizing the Gibbs state.

    kernel p(u -> w) = M[u,w] h(w) / (rho h(u)), stationary pi(u) = nu(u) h(u).
    """

    def __init__(self, eig: EigenData):
        self.eig = eig
        self.states = eig.states
        self.index = eig.index
        self.memory = eig.memory
        self.truncation = eig.truncation
        self.pressure = eig.log_rho
        M = eig.matrix
        S = M.shape[0]
        rows = np.repeat(np.arange(S), np.diff(M.indptr))
        data = M.data * eig.h[M.indices] / (eig.rho_scaled * eig.h[rows])
        self.kernel = sp.csr_matrix((data, M.indices.copy(), M.indptr.copy()), shape=(S, S))
        self.pi = eig.nu * eig.h
        self._row_dicts: list[dict | None] = [None] * S
        self._cum_rows: list | None = None
        self._rev: sp.csr_matrix | None = None
        self._rev_cum: list | None = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    def _row(self, i: int) -> dict:
        d = self._row_dicts[i]
        if d is None:
            lo, hi = self.kernel.indptr[i], self.kernel.indptr[i + 1]
            d = dict(zip(self.kernel.indices[lo:hi].tolist(), self.kernel.data[lo:hi].tolist()))
            self._row_dicts[i] = d
        return d

    def _cum(self):
        if self._cum_rows is None:
            rows = []
            for i in range(self.n_states):
                lo, hi = self.kernel.indptr[i], self.kernel.indptr[i + 1]
                cols = self.kernel.indices[lo:hi]
                cum = np.cumsum(self.kernel.data[lo:hi])
                rows.append((cols, cum))
            self._cum_rows = rows
        return self._cum_rows

    def reversed_kernel(self) -> sp.csr_matrix:
        """Time reversal: p_rev(w -> u) = pi(u) p(u -> w) / pi(w)."""
        if self._rev is None:
            KT = self.kernel.T.tocsr()
            S = self.n_states
            rows = np.repeat(np.arange(S), np.diff(KT.indptr))
            data = KT.data * self.pi[KT.indices] / self.pi[rows]
            self._rev = sp.csr_matrix((data, KT.indices.copy(), KT.indptr.copy()), shape=(S, S))
        return self._rev

    def _rev_cum_rows(self):
        if self._rev_cum is None:
            R = self.reversed_kernel()
            rows = []
            for i in range(self.n_states):
                lo, hi = R.indptr[i], R.indptr[i + 1]
                rows.append((R.indices[lo:hi], np.cumsum(R.data[lo:hi])))
            self._rev_cum = rows
        return self._rev_cum


def gibbs_measure(
    psi: Potential,
    A: IncidenceMatrix,
    N: int,
    **eig_kwargs,
) -> GibbsMarkovMeasure:
    return GibbsMarkovMeasure(rpf_eigendata(psi, A, N, **eig_kwargs))


def _state_path(mu: GibbsMarkovMeasure, word: Sequence[int]):
    m = mu.memory
    path = []
    for k in range(len(word) - m + 1):
        i = mu.index.get(tuple(word[k: k + m]))
        if i is None:
            return None
        path.append(i)
    return path


def cylinder_log_measure(mu: GibbsMarkovMeasure, word: Sequence[int]) -> float:
    """log mu([word]); -inf for inadmissible or out-of-truncation words."""
    if len(word) == 0:
        raise WordLengthError("cylinder needs a nonempty word")
    if any(e < 0 or e >= mu.truncation for e in word):
        return -math.inf
    m = mu.memory
    if len(word) < m:
        total = 0.0
        pref = tuple(word)
        for i, st in enumerate(mu.states):
            if st[: len(pref)] == pref:
                total += mu.pi[i]
        return math.log(total) if total > 0 else -math.inf
    path = _state_path(mu, word)
    if path is None:
        return -math.inf
    acc = math.log(mu.pi[path[0]]) if mu.pi[path[0]] > 0 else -math.inf
    for a, b in zip(path[:-1], path[1:]):
        p = mu._row(a).get(b, 0.0)
        if p <= 0.0:
            return -math.inf
        acc += math.log(p)
    return acc


def cylinder_measure(mu: GibbsMarkovMeasure, word: Sequence[int]) -> float:
    lm = cylinder_log_measure(mu, word)
    return math.exp(lm) if lm > -math.inf else 0.0


def sample_forward(mu: GibbsMarkovMeasure, length: int, seed: int = 0) -> Word:
    """A word of the given length from the stationary chain."""
    m = mu.memory
    if length < m:
        raise WordLengthError(f"forward samples need length >= memory {m}")
    rng = task_rng(seed)
    cum_pi = np.cumsum(mu.pi)
    i = int(np.searchsorted(cum_pi, rng.random() * cum_pi[-1]))
    word = list(mu.states[i])
    rows = mu._cum()
    while len(word) < length:
        cols, cum = rows[i]
        j = int(np.searchsorted(cum, rng.random() * cum[-1]))
        i = int(cols[j])
        word.append(mu.states[i][-1])
    return tuple(word)


def sample_past(
    mu: GibbsMarkovMeasure, future_prefix: Sequence[int], length: int, seed: int = 0
) -> Word:
    """A past word tau, drawn from the reversed chain, with tau+future admissible."""
    m = mu.memory
    if len(future_prefix) < m:
        raise WordLengthError(f"future prefix must carry at least memory={m} letters")
    start = mu.index.get(tuple(future_prefix[:m]))
    if start is None:
        raise WordLengthError("future prefix is not admissible at this truncation")
    rng = task_rng(seed)
    rows = mu._rev_cum_rows()
    out: list[int] = []
    i = start
    for _ in range(length):
        cols, cum = rows[i]
        if len(cols) == 0:
            raise ConvergenceError("state has no predecessors; chain not irreducible")
        j = int(np.searchsorted(cum, rng.random() * cum[-1]))
        i = int(cols[j])
        out.append(mu.states[i][0])
    out.reverse()
    return tuple(out)


def _greedy_extension(mu: GibbsMarkovMeasure, word: Sequence[int], extra: int) -> Word:
    """Extend by the most probable next letter; deterministic and admissible."""
    m = mu.memory
    path = _state_path(mu, word)
    i = path[-1]
    out = list(word)
    for _ in range(extra):
        row = mu._row(i)
        j = max(row, key=lambda c: (row[c], -c))
        out.append(mu.states[j][-1])
        i = j
    return tuple(out)


@dataclass
class GibbsAuditRow:
    n: int
    count: int
    r_min: float
    r_max: float
    exact_min: float | None
    exact_max: float | None

    @property
    def d_literal(self) -> float:
        return max(self.r_max, 1.0 / self.r_min)


@dataclass
class GibbsAudit:
    """Cylinder-mass Gibbs check.

    Literal ratio r = mu([w]) / exp(S_n psi(tau) - P n) at a point tau in [w]
    (bounded, with boundary eigenvector factors; its per-length constant must
    not trend upward). Exact-form ratio divides mu([w]) by the closed
    prediction nu(u_first) h(u_last) exp(S_{n-m} psi - (n-m) P), identically 1
    for the constructed chain.
    """

    rows: list[GibbsAuditRow]

    @property
    def d_literal(self) -> float:
        return max(r.d_literal for r in self.rows)

    @property
    def d_exact(self) -> float:
        vals = [
            max(r.exact_max, 1.0 / r.exact_min)
            for r in self.rows
            if r.exact_min is not None
        ]
        if not vals:
            raise WordLengthError("no audited lengths reach the potential memory")
        return max(vals)

    def trend(self) -> float:
        """Slope of log d_literal against n over the stabilized lengths."""
        pts = [(r.n, math.log(r.d_literal)) for r in self.rows]
        if len(pts) < 4:
            return 0.0
        pts = pts[2:]
        xs = np.array([p[0] for p in pts], dtype=float)
        ys = np.array([p[1] for p in pts], dtype=float)
        return float(np.polyfit(xs, ys, 1)[0])


def gibbs_audit(
    mu: GibbsMarkovMeasure,
    psi: Potential,
    n_range: Sequence[int] = range(1, 13),
    *,
    sample_size: int = 512,
    seed: int = 0,
) -> GibbsAudit:
    m = mu.memory
    P = mu.pressure
    eig = mu.eig
    rows = []
    for t, n in enumerate(n_range):
        try:
            words = enumerate_cylinders(n, mu.truncation, _mu_incidence(mu), cap=sample_size)
        except BudgetError:
            words = set()
            for k in range(sample_size):
                words.add(sample_forward(mu, max(n, m), seed=seed * 100003 + t * 1009 + k)[:n])
            words = sorted(words)
        r_min, r_max = math.inf, -math.inf
        e_min, e_max = math.inf, -math.inf
        count = 0
        for w in words:
            lm = cylinder_log_measure(mu, w)
            if lm == -math.inf:
                continue
            count += 1
            tau = _greedy_extension(mu, w, m - 1) if len(w) >= m else _pad_short(mu, w)
            sn = birkhoff_sum(psi, tau, n)
            r = math.exp(lm - (sn - P * n))
            r_min, r_max = min(r_min, r), max(r_max, r)
            if n >= m:
                path = _state_path(mu, w)
                s_trans = float(sum(eig.psi_vals[i] for i in path[:-1]))
                log_pred = (
                    math.log(eig.nu[path[0]])
                    + math.log(eig.h[path[-1]])
                    + s_trans
                    - P * (n - m)
                )
                rex = math.exp(lm - log_pred)
                e_min, e_max = min(e_min, rex), max(e_max, rex)
        if count == 0:
            raise ConvergenceError(f"no admissible cylinders of length {n}")
        rows.append(
            GibbsAuditRow(
                n,
                count,
                r_min,
                r_max,
                e_min if n >= m else None,
                e_max if n >= m else None,
            )
        )
    return GibbsAudit(rows)


def _mu_incidence(mu: GibbsMarkovMeasure) -> IncidenceMatrix:
    """Letter-level incidence induced by the chain's admissible states."""
    m = mu.memory
    if m == 1:
        pairs = set()
        for i in range(mu.n_states):
            for j in mu._row(i):
                pairs.add((mu.states[i][0], mu.states[j][0]))
        return IncidenceMatrix(lambda a, b: (a, b) in pairs, name="from-chain")
    # candidate words only; inadmissible ones are filtered downstream when
    # cylinder_log_measure returns -inf
    pair_ok = set()
    for st in mu.states:
        for k in range(m - 1):
            pair_ok.add((st[k], st[k + 1]))
    return IncidenceMatrix(lambda a, b: (a, b) in pair_ok, name="from-chain")


def _pad_short(mu: GibbsMarkovMeasure, word: Word) -> Word:
    """Complete a below-memory word to memory + its Birkhoff horizon."""
    m = mu.memory
    pref = tuple(word)
    for i, st in enumerate(mu.states):
        if st[: len(pref)] == pref:
            return _greedy_extension(mu, st, m - 1)[: len(word) + m - 1] if m > 1 else st
    raise WordLengthError("word extends to no admissible state")


def entropy_from_pressure(mu: GibbsMarkovMeasure) -> float:
    """h = P(psi) - integral of psi; exact for the chain since psi is m-local."""
    integral = float(mu.pi @ mu.eig.psi_vals)
    return mu.pressure - integral


def markov_entropy(mu: GibbsMarkovMeasure) -> float:
    """-sum_u pi(u) sum_w p(u->w) log p(u->w), the chain's entropy rate."""
    K = mu.kernel
    S = mu.n_states
    rows = np.repeat(np.arange(S), np.diff(K.indptr))
    data = K.data
    mask = data > 0
    return float(-(mu.pi[rows[mask]] * data[mask] * np.log(data[mask])).sum())


def measure_to_json(mu: GibbsMarkovMeasure, max_states: int = 4096) -> dict:
    """Dense JSON export {states, kernel, stationary, pressure}."""
    if mu.n_states > max_states:
        raise ConfigError(
            f"measure has {mu.n_states} states; refusing dense export beyond {max_states}"
        )
    dense = mu.kernel.toarray()
    return {
        "states": [list(map(int, s)) for s in mu.states],
        "kernel": [[float(v) for v in row] for row in dense],
        "stationary": [float(v) for v in mu.pi],
        "pressure": float(mu.pressure),
    }
