"""Periodic operators of order 2n with trigonometric-polynomial coefficients.

An operator is given by the half-order n and real-valued pi-periodic
coefficients p_0, ..., p_{n-1}, each stored as a trig polynomial in the
basis e^{2imx}.  Expanding the divergence form d^j/dx^j (p_j d^j/dx^j)
by the Leibniz rule yields the standard-form ODE

    y^(2n) = (-1)^n * (mu*y - sum_{m=0}^{2n-2} a_m(x) y^(m)),

which is what the integrator consumes.  There is never a y^(2n-1) term:
(p_j y^(j))^(j) only produces derivatives of order <= 2j <= 2n-2.
"""

import json
from math import comb

import numpy as np

from .errors import ComputationError, ConfigError


class TrigPoly:
    """Real-valued trigonometric polynomial sum_m c_m e^{2imx}, period pi.

    Conjugate symmetry c_{-m} = conj(c_m) is enforced at construction.
    """

    def __init__(self, coeffs):
        """coeffs: dict {m: complex} or array of length 2M+1 (m = -M..M)."""
        if isinstance(coeffs, dict):
            if coeffs:
                M = max(abs(int(m)) for m in coeffs)
            else:
                M = 0
            c = np.zeros(2 * M + 1, dtype=complex)
            for m, v in coeffs.items():
                c[int(m) + M] = v
        else:
            c = np.asarray(coeffs, dtype=complex)
            if c.ndim != 1 or c.size % 2 == 0:
                raise ConfigError("TrigPoly coefficient array must have odd length")
            M = c.size // 2
        scale = max(1.0, np.max(np.abs(c)) if c.size else 1.0)
        for m in range(1, M + 1):
            if abs(c[M + m] - np.conj(c[M - m])) > 1e-12 * scale:
                raise ConfigError(
                    f"realness violated: c_{m} and c_{-m} are not conjugate"
                )
        if abs(c[M].imag) > 1e-12 * scale:
            raise ConfigError("realness violated: c_0 must be real")
        # symmetrize exactly so evaluation is real to rounding
        sym = np.empty_like(c)
        for m in range(-M, M + 1):
            sym[M + m] = 0.5 * (c[M + m] + np.conj(c[M - m]))
        self.degree = M
        self.coeffs = sym
        self.coeffs.setflags(write=False)

    def coeff(self, m):
        if abs(m) > self.degree:
            return 0j
        return self.coeffs[self.degree + m]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        val = np.zeros(x.shape, dtype=complex)
        M = self.degree
        for m in range(-M, M + 1):
            c = self.coeffs[M + m]
            if c != 0:
                val = val + c * np.exp(2j * m * x)
        return val if val.shape else complex(val)

    def derivative(self):
        M = self.degree
        m = np.arange(-M, M + 1)
        return TrigPoly(self.coeffs * (2j * m))

    def __add__(self, other):
        M = max(self.degree, other.degree)
        c = np.zeros(2 * M + 1, dtype=complex)
        c[M - self.degree : M + self.degree + 1] += self.coeffs
        c[M - other.degree : M + other.degree + 1] += other.coeffs
        return TrigPoly(c)

    def scaled(self, a):
        """Product with a real scalar."""
        return TrigPoly(self.coeffs * float(a))

    @property
    def is_zero(self):
        return bool(np.all(self.coeffs == 0))

    def __repr__(self):
        terms = {m: self.coeff(m) for m in range(-self.degree, self.degree + 1)
                 if self.coeff(m) != 0}
        return f"TrigPoly({terms})"


def zero_poly():
    return TrigPoly({})


class OperatorSpec:
    """Half-order n and coefficients p_0..p_{n-1} of the divergence form."""

    def __init__(self, n, coeffs):
        n = int(n)
        if n < 1:
            raise ConfigError(f"half-order n must be >= 1, got {n}")
        coeffs = list(coeffs)
        if len(coeffs) != n:
            raise ConfigError(
                f"expected {n} coefficient polynomials, got {len(coeffs)}"
            )
        for j, p in enumerate(coeffs):
            if not isinstance(p, TrigPoly):
                raise ConfigError(f"coefficient p_{j} is not a TrigPoly")
        self.n = n
        self.coeffs = tuple(coeffs)

    def __repr__(self):
        return f"OperatorSpec(n={self.n}, coeffs={list(self.coeffs)})"


class StandardForm:
    """Expanded scalar ODE: leading (-1)^n y^(2n) plus sum a_m(x) y^(m)."""

    def __init__(self, n, a):
        a = list(a)
        if len(a) != 2 * n - 1:
            raise ConfigError("standard form needs 2n-1 lower-order coefficients")
        self.n = int(n)
        self.a = tuple(a)
        # precompute (m, c_m) tables for fast evaluation in the RHS
        self._tables = []
        for poly in self.a:
            M = poly.degree
            ms = np.arange(-M, M + 1)
            keep = poly.coeffs != 0
            self._tables.append((ms[keep], poly.coeffs[keep]))

    @property
    def order(self):
        return 2 * self.n

    def eval_coeffs(self, x):
        """(a_0(x), ..., a_{2n-2}(x)) as real floats."""
        out = np.empty(2 * self.n - 1, dtype=float)
        for i, (ms, cs) in enumerate(self._tables):
            v = np.sum(cs * np.exp(2j * ms * x)) if ms.size else 0j
            if abs(v.imag) > 1e-12 * max(1.0, abs(v)):
                raise ComputationError(
                    f"coefficient a_{i} evaluated to a non-real value at x={x}; "
                    "the StandardForm is corrupted"
                )
            out[i] = v.real
        return out


def expand_standard_form(spec):
    """Leibniz-expand the divergence form into a StandardForm.

    d^j/dx^j (p_j y^(j)) = sum_{i=0}^{j} C(j,i) p_j^{(j-i)} y^{(j+i)},
    so a_{j+i} accumulates C(j,i) * p_j^{(j-i)}.
    """
    n = spec.n
    a = [zero_poly() for _ in range(2 * n - 1)]
    for j, p in enumerate(spec.coeffs):
        d = [p]
        for _ in range(j):
            d.append(d[-1].derivative())
        # d[k] = p^{(k)}
        for i in range(j + 1):
            a[j + i] = a[j + i] + d[j - i].scaled(comb(j, i))
    return StandardForm(n, a)


def eval_coeffs(sf, x):
    return sf.eval_coeffs(x)


def parse_operator(document):
    """Build an OperatorSpec from a config document.

    Accepts a dict (already parsed) or JSON text with fields
      n: integer
      coefficients: array over j = 0..n-1, each an array of {m, re, im}.
    Coefficients not listed default to zero.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"operator document is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError("operator document must be a JSON object")
    if "n" not in document:
        raise ConfigError("operator document missing field 'n'")
    n = document["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"field 'n' must be a positive integer, got {n!r}")
    rows = document.get("coefficients", [])
    if len(rows) > n:
        raise ConfigError("more coefficient lists than n")
    polys = []
    for j in range(n):
        entries = rows[j] if j < len(rows) else []
        cmap = {}
        for rec in entries:
            try:
                m = int(rec["m"])
                re = float(rec.get("re", 0.0))
                im = float(rec.get("im", 0.0))
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(
                    f"bad coefficient record in p_{j}: {rec!r}"
                ) from e
            if m in cmap:
                raise ConfigError(f"duplicate harmonic m={m} in p_{j}")
            cmap[m] = re + 1j * im
        try:
            polys.append(TrigPoly(cmap))
        except ConfigError as e:
            raise ConfigError(f"p_{j}: {e}") from e
    return OperatorSpec(n, polys)


def mathieu_spec(amplitude=1.0):
    """n=1 operator with p_0 = 2*amplitude*cos(2x)  (c_{+-1} = amplitude)."""
    return OperatorSpec(1, [TrigPoly({1: amplitude, -1: amplitude})])


def free_spec(n):
    """The constant-coefficient operator (-1)^n d^{2n}/dx^{2n}."""
    return OperatorSpec(n, [zero_poly() for _ in range(n)])
