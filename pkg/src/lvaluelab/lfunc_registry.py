"""L-function descriptors (zeta and primitive Dirichlet L-functions) and tuples.

A :class:`LFunctionSpec` carries the Euler-product data of one L-function:
the prime-power coefficients ``b(p^l)`` of ``log F``, the constants of the
Selberg class axioms, and (for Dirichlet L-functions) the character table.
A :class:`TupleConfig` bundles several specs with rotation angles and checks
that the combination is admissible.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

_TOL = 1e-12


class SpecError(ValueError):
    """Invalid L-function or tuple definition."""


# ---------------------------------------------------------------------------
# elementary number theory helpers
# ---------------------------------------------------------------------------

def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorisation of ``n`` as ``[(p, e), ...]`` with ascending p."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _smallest_primitive_root(pe: int, p: int) -> int:
    """Smallest generator of (Z/p^e Z)* for an odd prime power."""
    phi = pe // p * (p - 1)
    divisors = [f for f, _ in factorize(phi)]
    for g in range(2, pe):
        if math.gcd(g, pe) != 1:
            continue
        if all(pow(g, phi // f, pe) != 1 for f in divisors):
            return g
    raise SpecError(f"no primitive root modulo {pe}")  # pragma: no cover


def _component_generators(q: int) -> list[tuple[int, int, int]]:
    """Generators of (Z/qZ)* along the CRT decomposition.

    Returns ``(modulus, generator, order)`` triples: prime powers ascending,
    and for a power of two the generators -1 then 5.
    """
    gens = []
    for p, e in factorize(q):
        pe = p**e
        if p == 2:
            if e == 2:
                gens.append((pe, pe - 1, 2))
            elif e >= 3:
                gens.append((pe, pe - 1, 2))
                gens.append((pe, 5, 2 ** (e - 2)))
            # e == 1: trivial group, no generator
        else:
            gens.append((pe, _smallest_primitive_root(pe, p), pe // p * (p - 1)))
    return gens


def _discrete_log_tables(q: int, gens) -> list[np.ndarray]:
    """For each generator, exponent of that generator for every residue mod q.

    Residues not coprime to q get -1.  For the pair (-1, 5) modulo 2^e the
    exponents are read off the decomposition n = (+-1) * 5^k.
    """
    tables = [np.full(q, -1, dtype=np.int64) for _ in gens]
    by_mod: dict[int, list[int]] = {}
    for i, (m, _, _) in enumerate(gens):
        by_mod.setdefault(m, []).append(i)
    for m, idx in by_mod.items():
        local = {}
        if len(idx) == 1:
            _, g, order = gens[idx[0]]
            x = 1
            for k in range(order):
                local[x] = (k,)
                x = x * g % m
        else:  # 2^e with e >= 3
            _, _, order5 = gens[idx[1]]
            x = 1
            for k in range(order5):
                local[x] = (0, k)
                local[(m - x) % m] = (1, k)
                x = x * 5 % m
        for n in range(q):
            if math.gcd(n, q) != 1:
                continue
            exps = local[n % m]
            for i, k in zip(idx, exps):
                tables[i][n] = k
    return tables


@lru_cache(maxsize=256)
def character_table(q: int, index: int) -> tuple[complex, ...]:
    """Values chi(0..q-1) of the Dirichlet character number ``index`` mod q.

    Canonical order: (Z/qZ)* is split by CRT into cyclic factors with
    generators taken in ascending prime-power order (smallest primitive root
    for odd prime powers; -1 then 5 for powers of two).  ``index`` is read as
    a mixed-radix number whose least significant digit is the exponent of the
    first generator; chi(g_i) = exp(2 pi i k_i / ord(g_i)).
    """
    if q < 1:
        raise SpecError("modulus must be positive")
    gens = _component_generators(q)
    radices = [o for _, _, o in gens]
    n_chars = int(np.prod(radices)) if radices else 1
    if not 0 <= index < n_chars:
        raise SpecError(f"character index {index} out of range for q={q} ({n_chars} characters)")
    digits = []
    rem = index
    for o in radices:
        digits.append(rem % o)
        rem //= o
    tables = _discrete_log_tables(q, gens)
    vals = []
    for n in range(q):
        if math.gcd(n, q) != 1:
            vals.append(0j)
            continue
        turn = 0.0
        for k, o, tab in zip(digits, radices, tables):
            turn += k * int(tab[n]) / o
        turn %= 1.0
        z = cmath.exp(2j * math.pi * turn)
        # snap to exact values on the real / imaginary axes
        z = complex(round(z.real) if abs(z.real - round(z.real)) < 1e-15 else z.real,
                    round(z.imag) if abs(z.imag - round(z.imag)) < 1e-15 else z.imag)
        vals.append(z)
    return tuple(vals)


def number_of_characters(q: int) -> int:
    return int(np.prod([o for _, _, o in _component_generators(q)] or [1]))


def conductor(values: Sequence[complex]) -> int:
    """Conductor of a character given by its table over one period."""
    q = len(values)
    for d in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(abs(values[n] - 1) < 1e-9 for n in range(1, q)
               if math.gcd(n, q) == 1 and n % d == 1 % d):
            return d
    return q  # pragma: no cover


def parity(values: Sequence[complex]) -> int:
    """0 for even characters, 1 for odd ones."""
    q = len(values)
    return 0 if q <= 2 or abs(values[q - 1] - 1) < 1e-9 else 1


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LFunctionSpec:
    """Euler-product data of one degree-one L-function.

    ``character_values[n % q]`` gives chi(n); for zeta the table is ``(1,)``
    with ``q = 1``.  ``b(p^l) = chi(p)^l / l`` for both kinds.
    """

    kind: str
    q: int = 1
    index: int = 0
    character_values: tuple = (1 + 0j,)
    n_F: float = 1.0
    vartheta_F: float = 0.0
    degree: float = 1.0
    pole_order: int = 1

    # derived, filled in __post_init__
    parity: int = field(default=0, compare=False)
    label: str = field(default="zeta", compare=False)

    def __post_init__(self):
        if self.kind not in ("zeta", "dirichlet"):
            raise SpecError(f"unknown kind {self.kind!r}")
        if len(self.character_values) != self.q:
            raise SpecError("character table length must equal q")
        object.__setattr__(self, "parity", parity(self.character_values))
        lbl = "zeta" if self.kind == "zeta" else f"L(chi_{self.q}.{self.index})"
        object.__setattr__(self, "label", lbl)

    @property
    def key(self) -> tuple:
        return (self.kind, self.q, self.index)

    @property
    def chi_array(self) -> np.ndarray:
        return np.asarray(self.character_values, dtype=complex)

    def chi(self, n):
        """chi(n) for integer n or an integer array."""
        arr = self.chi_array
        if np.ndim(n) == 0:
            return complex(arr[int(n) % self.q])
        return arr[np.asarray(n, dtype=np.int64) % self.q]

    def a(self, n: int) -> complex:
        """Dirichlet coefficient a_F(n) (= chi(n))."""
        return self.chi(n)

    def coeff_b(self, p, ell):
        """b_F(p^l) = chi(p)^l / l (vectorised over arrays)."""
        if np.ndim(p) == 0 and np.ndim(ell) == 0:
            if not is_prime(int(p)):
                raise SpecError(f"{p} is not prime")
            if int(ell) < 1:
                raise SpecError("ell must be >= 1")
            return self.chi(int(p)) ** int(ell) / int(ell)
        p = np.asarray(p, dtype=np.int64)
        ell = np.asarray(ell, dtype=np.int64)
        return self.chi(p) ** ell / ell

    def von_mangoldt(self, n: int) -> complex:
        """Lambda_F(n) = b_F(n) log n (zero unless n is a prime power)."""
        fac = factorize(int(n))
        if len(fac) != 1:
            return 0j
        p, e = fac[0]
        return self.coeff_b(p, e) * math.log(n)

    def local_log_factor(self, p, w):
        """sum_l b(p^l) w^l = -log(1 - chi(p) w), the log of the local factor."""
        return -np.log1p(-self.chi(p) * w)

    def root_number(self) -> complex:
        """epsilon in the functional equation (1 for zeta)."""
        if self.kind == "zeta":
            return 1 + 0j
        q = self.q
        tau = sum(self.character_values[a] * cmath.exp(2j * math.pi * a / q) for a in range(q))
        return tau / ((1j) ** self.parity * math.sqrt(q))


def make_zeta() -> LFunctionSpec:
    """The Riemann zeta function."""
    return LFunctionSpec(kind="zeta", q=1, index=0, character_values=(1 + 0j,), pole_order=1)


def make_dirichlet(q: int, index: int) -> LFunctionSpec:
    """L(s, chi) for the primitive character number ``index`` modulo ``q``."""
    q = int(q)
    index = int(index)
    if q < 3:
        raise SpecError("Dirichlet L-functions need q >= 3 (no primitive non-principal character below)")
    vals = character_table(q, index)
    if index == 0:
        raise SpecError(f"index 0 is the principal character mod {q}")
    cond = conductor(vals)
    if cond != q:
        raise SpecError(f"character {index} mod {q} is not primitive (conductor {cond})")
    return LFunctionSpec(kind="dirichlet", q=q, index=index, character_values=vals,
                         pole_order=0)


def primitive_indices(q: int) -> list[int]:
    """All indices of primitive characters modulo q."""
    return [i for i in range(1, number_of_characters(q)) if conductor(character_table(q, i)) == q]


def spec_from_dict(d: dict) -> LFunctionSpec:
    kind = str(d.get("kind", "zeta")).lower()
    if kind == "zeta":
        return make_zeta()
    if kind == "dirichlet":
        return make_dirichlet(int(d["q"]), int(d["index"]))
    raise SpecError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# tuples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TupleConfig:
    """An r-tuple of L-functions with rotation angles theta_j."""

    specs: tuple
    thetas: tuple
    h_F: float
    alpha_F: float
    vartheta_max: float

    @property
    def r(self) -> int:
        return len(self.specs)

    def canonical(self) -> list[dict]:
        """Canonical, JSON-serialisable description (used for fingerprints)."""
        return [{"kind": s.kind, "q": s.q, "index": s.index, "theta": float(th)}
                for s, th in zip(self.specs, self.thetas)]

    def labels(self) -> list[str]:
        return [s.label for s in self.specs]


def _check_a2(specs, thetas):
    r = len(specs)
    for i in range(r):
        same = [j for j in range(r) if j != i and specs[j] == specs[i]]
        if len(same) > 1:
            raise SpecError(f"spec {specs[i].label} appears more than twice in the tuple")
        for j in same:
            d = (thetas[i] - thetas[j] - math.pi / 2) % math.pi
            if min(d, math.pi - d) > 1e-9:
                raise SpecError(
                    f"components {i} and {j} share {specs[i].label} but "
                    f"|theta_{i} - theta_{j}| is not pi/2 mod pi")


def make_tuple(specs: Sequence[LFunctionSpec], thetas: Sequence[float]) -> TupleConfig:
    """Validate and bundle specs with their rotation angles."""
    specs = tuple(specs)
    thetas = tuple(float(t) for t in thetas)
    if len(specs) < 1:
        raise SpecError("a tuple needs at least one L-function")
    if len(specs) != len(thetas):
        raise SpecError("specs and thetas differ in length")
    _check_a2(specs, thetas)
    h = sum(1.0 / s.n_F for s in specs)
    vt = max(s.vartheta_F for s in specs)
    r = len(specs)
    alpha = 2.0 * r if vt == 0 else min(2.0 * r, (1 - 2 * vt) / (2 * vt))
    return TupleConfig(specs=specs, thetas=thetas, h_F=h, alpha_F=alpha, vartheta_max=vt)


def tuple_from_records(records: Iterable[dict]) -> TupleConfig:
    records = list(records)
    specs = [spec_from_dict(r) for r in records]
    thetas = [float(r.get("theta", 0.0)) for r in records]
    return make_tuple(specs, thetas)


def load_tuple_config(path) -> TupleConfig:
    """Read a tuple from JSON or YAML: a list of {kind, q, index, theta}.

    A mapping with a ``tuple`` key holding that list is accepted as well.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("tuple")
    if not isinstance(data, list):
        raise SpecError(f"{path}: expected a list of components")
    return tuple_from_records(data)


def parse_tuple_arg(arg: str) -> TupleConfig:
    """Parse a tuple from a file path or a short inline form.

    Inline form: comma-separated items ``zeta``, ``chi:q:index`` with an
    optional ``@theta`` suffix, e.g. ``zeta@0,chi:4:1@0``.
    """
    p = Path(arg)
    if p.suffix.lower() in (".json", ".yaml", ".yml") and p.exists():
        return load_tuple_config(p)
    records = []
    for item in arg.split(","):
        item = item.strip()
        if not item:
            continue
        body, _, theta = item.partition("@")
        parts = body.split(":")
        if parts[0] == "zeta":
            rec = {"kind": "zeta"}
        elif parts[0] in ("chi", "dirichlet") and len(parts) == 3:
            rec = {"kind": "dirichlet", "q": int(parts[1]), "index": int(parts[2])}
        else:
            raise SpecError(f"cannot parse tuple item {item!r}")
        rec["theta"] = float(theta) if theta else 0.0
        records.append(rec)
    return tuple_from_records(records)
