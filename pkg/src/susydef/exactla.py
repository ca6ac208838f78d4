"""Exact scalars and dense exact linear algebra.

Every identity check in this package reduces to "some matrix is exactly
zero", so the scalar type is a Gaussian rational (complex number with
Fraction real and imaginary parts) and nothing here ever rounds.
Matrices are dense and immutable; spinor spaces at desk scale have
dimension <= 32, so no sparsity is needed at this level.
"""

from __future__ import annotations

from fractions import Fraction


class ShapeError(ValueError):
    """Dimension mismatch in a matrix/vector operation."""


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot build an exact rational from {x!r}")


class GaussianRational:
    """a + b*i with rational a, b.  Immutable and hashable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- ring/field operations ------------------------------------------

    def __add__(self, other):
        other = gr(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-gr(other))

    def __rsub__(self, other):
        return gr(other) + (-self)

    def __mul__(self, other):
        other = gr(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * gr(other).inverse()

    def __rtruediv__(self, other):
        return gr(other) * self.inverse()

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = gr(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        return format_scalar(self)

    @staticmethod
    def parse(text: str) -> "GaussianRational":
        return parse_scalar(text)


def gr(x) -> GaussianRational:
    """Coerce ints, Fractions and strings to GaussianRational."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x, 0)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot coerce {x!r} to GaussianRational")


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_scalar(x: GaussianRational) -> str:
    """Lossless text form: "p/q", "r/s*i" or "p/q+r/s*i"."""
    if x.im == 0:
        return _frac_str(x.re)
    im = f"{_frac_str(x.im)}*i"
    if x.re == 0:
        return im
    sign = "+" if x.im > 0 else ""
    return f"{_frac_str(x.re)}{sign}{im}"


def parse_scalar(text: str) -> GaussianRational:
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if s.endswith("*i"):
        body = s[:-2]
        # split off a trailing signed fraction for the imaginary part
        cut = max(body.rfind("+", 1), body.rfind("-", 1))
        if cut <= 0:
            return GaussianRational(0, Fraction(body))
        return GaussianRational(Fraction(body[:cut]), Fraction(body[cut:].lstrip("+")))
    if s == "i":
        return I
    if s == "-i":
        return -I
    return GaussianRational(Fraction(s), 0)


# ---------------------------------------------------------------------------
# vectors (tuples of GaussianRational)


def vector(entries) -> tuple:
    return tuple(gr(e) for e in entries)


def vec_add(u, v):
    if len(u) != len(v):
        raise ShapeError("vector length mismatch")
    return tuple(a + b for a, b in zip(u, v))


def vec_scale(c, u):
    c = gr(c)
    return tuple(c * a for a in u)


def vec_is_zero(u) -> bool:
    return all(a.is_zero() for a in u)


def zero_vector(n) -> tuple:
    return (ZERO,) * n


def basis_vector(n, j) -> tuple:
    return tuple(ONE if k == j else ZERO for k in range(n))


class ExactMatrix:
    """Dense matrix of Gaussian rationals, immutable.

    Entries are stored as integer grids over one common positive
    denominator, which keeps the hot path (matrix product) in pure
    integer arithmetic.
    """

    __slots__ = ("rows", "cols", "_den", "_re", "_im", "_real")

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        n = len(rows)
        m = len(rows[0]) if n else 0
        if any(len(r) != m for r in rows):
            raise ShapeError("ragged rows")
        den = 1
        vals = [[gr(x) for x in r] for r in rows]
        for r in vals:
            for x in r:
                den = _lcm(den, _lcm(x.re.denominator, x.im.denominator))
        re_grid = tuple(
            tuple(int(x.re * den) for x in r) for r in vals
        )
        im_grid = tuple(
            tuple(int(x.im * den) for x in r) for r in vals
        )
        object.__setattr__(self, "rows", n)
        object.__setattr__(self, "cols", m)
        object.__setattr__(self, "_den", den)
        object.__setattr__(self, "_re", re_grid)
        object.__setattr__(self, "_im", im_grid)
        object.__setattr__(self, "_real", all(all(v == 0 for v in r) for r in im_grid))

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def _raw(n, m, den, re_grid, im_grid) -> "ExactMatrix":
        obj = object.__new__(ExactMatrix)
        g = den
        for r in re_grid:
            for v in r:
                g = _gcd(g, v)
                if g == 1:
                    break
        if g != 1:
            for r in im_grid:
                for v in r:
                    g = _gcd(g, v)
                    if g == 1:
                        break
                if g == 1:
                    break
        if g > 1:
            re_grid = [[v // g for v in r] for r in re_grid]
            im_grid = [[v // g for v in r] for r in im_grid]
            den //= g
        object.__setattr__(obj, "rows", n)
        object.__setattr__(obj, "cols", m)
        object.__setattr__(obj, "_den", den)
        object.__setattr__(obj, "_re", tuple(tuple(r) for r in re_grid))
        object.__setattr__(obj, "_im", tuple(tuple(r) for r in im_grid))
        object.__setattr__(obj, "_real", all(all(v == 0 for v in r) for r in im_grid))
        return obj

    @staticmethod
    def zeros(n, m=None) -> "ExactMatrix":
        m = n if m is None else m
        return ExactMatrix._raw(n, m, 1, [[0] * m for _ in range(n)], [[0] * m for _ in range(n)])

    @staticmethod
    def identity(n) -> "ExactMatrix":
        re = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        return ExactMatrix._raw(n, n, 1, re, [[0] * n for _ in range(n)])

    @staticmethod
    def from_function(n, m, f) -> "ExactMatrix":
        return ExactMatrix([[f(i, j) for j in range(m)] for i in range(n)])

    @staticmethod
    def column(entries) -> "ExactMatrix":
        return ExactMatrix([[e] for e in entries])

    # -- access ---------------------------------------------------------

    def entry(self, i, j) -> GaussianRational:
        return GaussianRational(
            Fraction(self._re[i][j], self._den), Fraction(self._im[i][j], self._den)
        )

    def row(self, i) -> tuple:
        return tuple(self.entry(i, j) for j in range(self.cols))

    def column_vector(self, j=0) -> tuple:
        return tuple(self.entry(i, j) for i in range(self.rows))

    def entries(self):
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    # -- algebra --------------------------------------------------------

    def __add__(self, other):
        self._same_shape(other)
        d1, d2 = self._den, other._den
        l = _lcm(d1, d2)
        a, b = l // d1, l // d2
        re = [
            [self._re[i][j] * a + other._re[i][j] * b for j in range(self.cols)]
            for i in range(self.rows)
        ]
        im = [
            [self._im[i][j] * a + other._im[i][j] * b for j in range(self.cols)]
            for i in range(self.rows)
        ]
        return ExactMatrix._raw(self.rows, self.cols, l, re, im)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ExactMatrix._raw(
            self.rows,
            self.cols,
            self._den,
            [[-v for v in r] for r in self._re],
            [[-v for v in r] for r in self._im],
        )

    def scale(self, c) -> "ExactMatrix":
        c = gr(c)
        den = self._den * _lcm(c.re.denominator, c.im.denominator)
        cr = int(c.re * (den // self._den))
        ci = int(c.im * (den // self._den))
        re = [
            [self._re[i][j] * cr - self._im[i][j] * ci for j in range(self.cols)]
            for i in range(self.rows)
        ]
        im = [
            [self._re[i][j] * ci + self._im[i][j] * cr for j in range(self.cols)]
            for i in range(self.rows)
        ]
        return ExactMatrix._raw(self.rows, self.cols, den * self._den // self._den, re, im)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        n, k, m = self.rows, self.cols, other.cols
        if k == 0:
            return ExactMatrix.zeros(n, m)
        # sparsity-aware product: gamma matrices at desk scale have only a
        # couple of nonzero entries per row, so walk nonzeros of the right
        # factor's rows
        rrows = []
        for t in range(k):
            rr, ri = other._re[t], other._im[t]
            rrows.append([(j, rr[j], ri[j]) for j in range(m) if rr[j] or ri[j]])
        re = [[0] * m for _ in range(n)]
        im = [[0] * m for _ in range(n)]
        for i in range(n):
            ar, ai = self._re[i], self._im[i]
            rrow, irow = re[i], im[i]
            for t in range(k):
                xr, xi = ar[t], ai[t]
                if not xr and not xi:
                    continue
                if xi:
                    for j, yr, yi in rrows[t]:
                        rrow[j] += xr * yr - xi * yi
                        irow[j] += xr * yi + xi * yr
                else:
                    for j, yr, yi in rrows[t]:
                        rrow[j] += xr * yr
                        if yi:
                            irow[j] += xr * yi
        return ExactMatrix._raw(n, m, self._den * other._den, re, im)

    def mat_vec(self, v) -> tuple:
        if len(v) != self.cols:
            raise ShapeError("matrix/vector shape mismatch")
        out = []
        den = Fraction(1, self._den)
        for i in range(self.rows):
            s = ZERO
            for j, x in enumerate(v):
                x = gr(x)
                if x.is_zero():
                    continue
                s = s + GaussianRational(
                    Fraction(self._re[i][j]), Fraction(self._im[i][j])
                ) * x
            out.append(GaussianRational(s.re * den, s.im * den))
        return tuple(out)

    def transpose(self) -> "ExactMatrix":
        re = [list(r) for r in zip(*self._re)] if self.rows else []
        im = [list(r) for r in zip(*self._im)] if self.rows else []
        return ExactMatrix._raw(self.cols, self.rows, self._den, re, im)

    def trace(self) -> GaussianRational:
        if self.rows != self.cols:
            raise ShapeError("trace of a non-square matrix")
        s = ZERO
        for i in range(self.rows):
            s = s + self.entry(i, i)
        return s

    # -- predicates -----------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return all(all(v == 0 for v in r) for r in self._re) and self._real

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.shape, self._den, self._re, self._im))

    def symmetry(self):
        """+1 if symmetric, -1 if antisymmetric, None otherwise."""
        if self == self.transpose():
            return 1
        if self == -self.transpose():
            return -1
        return None

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"

    # -- elimination-based operations ------------------------------------

    def _echelon(self):
        """Row echelon form; returns (rows as lists, pivot columns)."""
        a = [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]
        pivots = []
        r = 0
        for c in range(self.cols):
            pr = None
            for i in range(r, self.rows):
                if not a[i][c].is_zero():
                    pr = i
                    break
            if pr is None:
                continue
            a[r], a[pr] = a[pr], a[r]
            inv = a[r][c].inverse()
            a[r] = [x * inv for x in a[r]]
            for i in range(self.rows):
                if i != r and not a[i][c].is_zero():
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return a, pivots

    def rank(self) -> int:
        return len(self._echelon()[1])

    def kernel_basis(self):
        """Basis of the right kernel as n x 1 column matrices.

        Deterministic: Gaussian elimination with leftmost-nonzero
        pivoting, free variables set to one in column order.
        """
        a, pivots = self._echelon()
        piv_set = set(pivots)
        free = [c for c in range(self.cols) if c not in piv_set]
        basis = []
        for fc in free:
            v = [ZERO] * self.cols
            v[fc] = ONE
            for r, pc in enumerate(pivots):
                v[pc] = -a[r][fc]
            basis.append(ExactMatrix.column(v))
        return basis

    def solve(self, b):
        """Solve m @ x = b exactly; returns a vector or None if inconsistent."""
        if len(b) != self.rows:
            raise ShapeError("right-hand side length mismatch")
        aug = ExactMatrix(
            [list(self.row(i)) + [gr(b[i])] for i in range(self.rows)]
        )
        a, pivots = aug._echelon()
        for r, pc in enumerate(pivots):
            if pc == self.cols:
                return None
        x = [ZERO] * self.cols
        for r, pc in enumerate(pivots):
            x[pc] = a[r][self.cols]
        return tuple(x)

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise ShapeError("inverse of a non-square matrix")
        n = self.rows
        aug = ExactMatrix(
            [
                list(self.row(i)) + [ONE if i == j else ZERO for j in range(n)]
                for i in range(n)
            ]
        )
        a, pivots = aug._echelon()
        if pivots != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return ExactMatrix([row[n:] for row in a])

    # -- serialization ----------------------------------------------------

    def to_json(self):
        return [[format_scalar(self.entry(i, j)) for j in range(self.cols)] for i in range(self.rows)]

    @staticmethod
    def from_json(data) -> "ExactMatrix":
        return ExactMatrix([[parse_scalar(x) for x in row] for row in data])


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _lcm(a, b):
    if a == 0 or b == 0:
        return 0
    return a * b // _gcd(a, b)


def kernel_basis(m: ExactMatrix):
    """Module-level alias: basis of the right kernel of m."""
    return m.kernel_basis()


def solve_linear(m: ExactMatrix, b):
    """Module-level alias: exact solution of m @ x = b, or None."""
    return m.solve(b)


def stack_rows(mats):
    """Vertically stack matrices with equal column counts."""
    cols = mats[0].cols
    rows = []
    for m in mats:
        if m.cols != cols:
            raise ShapeError("column count mismatch in stack")
        rows.extend(m.entries())
    return ExactMatrix(rows)


def from_columns(columns):
    """Matrix whose j-th column is columns[j] (tuples of scalars)."""
    n = len(columns[0])
    return ExactMatrix([[columns[j][i] for j in range(len(columns))] for i in range(n)])
