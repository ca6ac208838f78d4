"""G2 structure constants on R^7: the 3-form, its Hodge dual, trace
identities and the g2 (+) / 7 (-) projectors on 2-forms.

All tensors here are real with integer or rational entries and all
index raising is plain Euclidean (+delta); contractions are exhaustive
loops, never sampled.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .exactla import ExactMatrix, Fraction as _F  # noqa: F401

DIM = 7

# Fano-plane triple set; the sign pattern below is frozen by the double
# gate (Clifford relation of the induced D=7 gamma matrices + all four
# trace identities).  See _search_sign_patterns for the gate itself.
TRIPLES = ((0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5))
FROZEN_SIGNS = (1, 1, -1, 1, 1, 1, -1)


class BadStructureConstants(ValueError):
    """The supplied 3-form does not pass the G2 gates."""


class G2Structure:
    """Totally antisymmetric omega (rank 3) and its Hodge dual (rank 4)."""

    __slots__ = ("omega", "star")

    def __init__(self, omega, star=None):
        self.omega = omega
        self.star = hodge_star(omega) if star is None else star

    def omega_at(self, i, j, k) -> int:
        return self.omega[i][j][k]

    def star_at(self, i, j, k, l) -> int:
        return self.star[i][j][k][l]

    def nonzero_triples(self):
        return [
            (i, j, k)
            for i in range(DIM)
            for j in range(i + 1, DIM)
            for k in range(j + 1, DIM)
            if self.omega[i][j][k] != 0
        ]


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for n in range(len(perm)):
        while perm[n] != n:
            p = perm[n]
            perm[n], perm[p] = perm[p], perm[n]
            sign = -sign
    return sign


def omega_from_signs(signs, triples=TRIPLES):
    """Dense rank-3 table from one sign per oriented Fano triple."""
    w = [[[0] * DIM for _ in range(DIM)] for _ in range(DIM)]
    for (a, b, c), s in zip(triples, signs):
        for p in itertools.permutations((0, 1, 2)):
            idx = (a, b, c)
            i, j, k = idx[p[0]], idx[p[1]], idx[p[2]]
            w[i][j][k] = s * _perm_sign(p)
    return tuple(tuple(tuple(r) for r in plane) for plane in w)


def hodge_star(omega):
    """Euclidean Hodge dual with epsilon_{1..7} = +1."""
    star = [[[[0] * DIM for _ in range(DIM)] for _ in range(DIM)] for _ in range(DIM)]
    for quad in itertools.combinations(range(DIM), 4):
        rest = tuple(x for x in range(DIM) if x not in quad)
        a, b, c = rest
        # omega is totally antisymmetric, so the 1/3! sum over orderings
        # of the complement collapses to a single signed term
        val = _perm_sign(quad + rest) * omega[a][b][c]
        for p in itertools.permutations(range(4)):
            i, j, k, l = (quad[p[0]], quad[p[1]], quad[p[2]], quad[p[3]])
            star[i][j][k][l] = _perm_sign(p) * val
    return tuple(tuple(tuple(tuple(r) for r in cube) for cube in plane) for plane in star)


def _clifford_gate(omega) -> bool:
    """gamma built per the (gamma7-1) table must satisfy gg+gg = -2 delta."""
    from .exactla import GaussianRational

    n = DIM + 1
    gammas = []
    for mu in range(DIM):
        g = [[0] * n for _ in range(n)]
        for nu in range(DIM):
            for kappa in range(DIM):
                g[nu][kappa] = omega[mu][nu][kappa]
            g[nu][DIM] = 1 if mu == nu else 0
            g[DIM][nu] = -1 if mu == nu else 0
        gammas.append(g)

    def mul(a, b):
        return [
            [sum(a[i][t] * b[t][j] for t in range(n)) for j in range(n)]
            for i in range(n)
        ]

    for mu in range(DIM):
        for nu in range(mu, DIM):
            ab = mul(gammas[mu], gammas[nu])
            ba = mul(gammas[nu], gammas[mu])
            target = -2 if mu == nu else 0
            for i in range(n):
                for j in range(n):
                    want = target if i == j else 0
                    if ab[i][j] + ba[i][j] != want:
                        return False
    return True


def verify_traces(g2: G2Structure) -> dict:
    """Exhaustively evaluate the four trace identities; residuals must be 0."""
    w, s = g2.omega, g2.star
    report = {}

    res = 0
    for m, n_, r, sg in itertools.product(range(DIM), repeat=4):
        lhs = sum(w[m][n_][k] * w[k][r][sg] for k in range(DIM))
        rhs = (1 if (m == r and n_ == sg) else 0) - (1 if (m == sg and n_ == r) else 0) - s[m][n_][r][sg]
        res = max(res, abs(lhs - rhs))
    report["omega_omega_single"] = res

    res = 0
    for m, r in itertools.product(range(DIM), repeat=2):
        lhs = sum(w[m][n_][k] * w[r][n_][k] for n_ in range(DIM) for k in range(DIM))
        res = max(res, abs(lhs - (6 if m == r else 0)))
    report["omega_omega_double"] = res

    res = Fraction(0)
    sixth = Fraction(1, 6)
    half = Fraction(1, 2)
    for n_, k, r, m, sg in itertools.product(range(DIM), repeat=5):
        lhs = Fraction(sum(s[n_][k][r][l] * w[m][sg][l] for l in range(DIM)))
        rhs = Fraction(0)
        # 6 * antisym over [m sg] (weight 1/2) and [n k r] (weight 1/6) of
        # delta_{m n} omega_{sg k r}; antisymmetrize over index positions
        lower = (n_, k, r)
        for pm, psg, smsg in ((m, sg, 1), (sg, m, -1)):
            for pos in itertools.permutations(range(3)):
                sp = _perm_sign(pos)
                p0, p1, p2 = lower[pos[0]], lower[pos[1]], lower[pos[2]]
                if pm == p0:
                    rhs += 6 * half * sixth * smsg * sp * w[psg][p1][p2]
        res = max(res, abs(lhs - rhs))
    report["star_omega_mixed"] = res

    res = 0
    for m, r, sg in itertools.product(range(DIM), repeat=3):
        lhs = sum(s[n_][k][r][sg] * w[m][n_][k] for n_ in range(DIM) for k in range(DIM))
        res = max(res, abs(lhs + 4 * w[m][r][sg]))
    report["star_omega_contracted"] = res

    report["all_zero"] = all(v == 0 for v in report.values())
    return report


def _search_sign_patterns(limit=None):
    """All sign patterns on TRIPLES passing the Clifford + trace gates."""
    found = []
    for bits in range(2 ** len(TRIPLES)):
        signs = tuple(1 if bits & (1 << i) == 0 else -1 for i in range(len(TRIPLES)))
        w = omega_from_signs(signs)
        if not _clifford_gate(w):
            continue
        g2 = G2Structure(w)
        if verify_traces(g2)["all_zero"]:
            found.append(signs)
            if limit and len(found) >= limit:
                break
    return found


def build_g2() -> G2Structure:
    """The frozen G2 structure; asserts both gates at construction time."""
    w = omega_from_signs(FROZEN_SIGNS)
    if not _clifford_gate(w):
        raise BadStructureConstants("frozen table fails the Clifford gate")
    g2 = G2Structure(w)
    if not verify_traces(g2)["all_zero"]:
        raise BadStructureConstants("frozen table fails the trace identities")
    return g2


# ---------------------------------------------------------------------------
# two-form machinery: so(7) = g2 (14, +) ⊕ 7 (-)

PAIRS = [(i, j) for i in range(DIM) for j in range(i + 1, DIM)]
PAIR_INDEX = {p: n for n, p in enumerate(PAIRS)}


def two_form_is_antisymmetric(beta) -> bool:
    return all(beta[i][j] == -beta[j][i] for i in range(DIM) for j in range(DIM))


def project_pi(g2: G2Structure, sign: int, beta):
    """Pi_+ (g2 part) or Pi_- (7 part) of an antisymmetric 2-tensor."""
    if not two_form_is_antisymmetric(beta):
        raise ValueError("input 2-form is not antisymmetric")
    s = g2.star
    out = [[Fraction(0)] * DIM for _ in range(DIM)]
    for i in range(DIM):
        for j in range(DIM):
            contr = sum(Fraction(s[i][j][r][t]) * beta[r][t] for r, t in itertools.product(range(DIM), repeat=2))
            if sign > 0:
                out[i][j] = Fraction(2, 3) * (beta[i][j] + Fraction(1, 4) * contr)
            else:
                out[i][j] = Fraction(1, 3) * (beta[i][j] - Fraction(1, 2) * contr)
    return tuple(tuple(r) for r in out)


def pi_matrix(g2: G2Structure, sign: int) -> ExactMatrix:
    """Projector as an exact 21x21 matrix on the increasing-pair basis."""
    cols = []
    for (a, b) in PAIRS:
        beta = [[0] * DIM for _ in range(DIM)]
        beta[a][b] = 1
        beta[b][a] = -1
        out = project_pi(g2, sign, beta)
        cols.append([out[i][j] for (i, j) in PAIRS])
    return ExactMatrix([[cols[c][r] for c in range(len(PAIRS))] for r in range(len(PAIRS))])


def pi_coefficient_report(g2: G2Structure) -> dict:
    """Compare the printed projector coefficients against eigen-derived ones.

    The operator T(beta) = *omega . beta has rational eigenvalues (t7 on
    the 7-dim part, t14 on the g2 part); the projectors derived from them
    must match the printed (2/3)(1 + 1/4 T) and (1/3)(1 - 1/2 T).
    """
    p_plus = pi_matrix(g2, +1)
    p_minus = pi_matrix(g2, -1)
    n = len(PAIRS)
    ident = ExactMatrix.identity(n)
    t_op = p_plus.scale(Fraction(3, 2)) - ident  # = (1/4) T from the printed formula
    report = {
        "idempotent_plus": (p_plus @ p_plus) == p_plus,
        "idempotent_minus": (p_minus @ p_minus) == p_minus,
        "complementary": (p_plus + p_minus) == ident,
        "orthogonal": (p_plus @ p_minus).is_zero(),
        "rank_plus": p_plus.rank(),
        "rank_minus": p_minus.rank(),
    }
    # eigenvalue check of T on the two ranges: T = -4 on im(Pi_-), +2 on im(Pi_+)
    t_full = t_op.scale(4)
    report["t_eigenvalue_on_7"] = ((t_full @ p_minus) - p_minus.scale(-4)).is_zero()
    report["t_eigenvalue_on_14"] = ((t_full @ p_plus) - p_plus.scale(2)).is_zero()
    report["printed_coefficients_match"] = all(
        report[k] for k in (
            "idempotent_plus", "idempotent_minus", "complementary", "orthogonal",
            "t_eigenvalue_on_7", "t_eigenvalue_on_14",
        )
    ) and report["rank_plus"] == 14 and report["rank_minus"] == 7
    return report


def g2_project_curvature(g2: G2Structure, r):
    """Project a rank-4 tensor (antisymmetric in both pairs) into g2 x g2.

    Pi_+ is applied to the first index pair and then to the last, so the
    output satisfies both R_{mnkl} omega^{kls} = 0 and 2R = *omega . R.
    """
    for i, j, k, l in itertools.product(range(DIM), repeat=4):
        if r[i][j][k][l] != -r[j][i][k][l] or r[i][j][k][l] != -r[i][j][l][k]:
            raise ValueError("input tensor is not antisymmetric in both pairs")
    s = g2.star

    def proj_first(t):
        out = [[[[Fraction(0)] * DIM for _ in range(DIM)] for _ in range(DIM)] for _ in range(DIM)]
        for k, l in itertools.product(range(DIM), repeat=2):
            for i, j in itertools.product(range(DIM), repeat=2):
                contr = sum(
                    Fraction(s[i][j][a][b]) * t[a][b][k][l]
                    for a, b in itertools.product(range(DIM), repeat=2)
                    if s[i][j][a][b]
                )
                out[i][j][k][l] = Fraction(2, 3) * (Fraction(t[i][j][k][l]) + Fraction(1, 4) * contr)
        return out

    first = proj_first(r)
    # project the last pair by swapping pairs, projecting, swapping back
    swapped = [[[[first[k][l][i][j] for l in range(DIM)] for k in range(DIM)] for j in range(DIM)] for i in range(DIM)]
    swapped = proj_first(swapped)
    out = [[[[swapped[k][l][i][j] for l in range(DIM)] for k in range(DIM)] for j in range(DIM)] for i in range(DIM)]
    return tuple(tuple(tuple(tuple(x for x in row) for row in cube) for cube in plane) for plane in out)


def curvature_residuals(g2: G2Structure, r) -> dict:
    """Exact residuals of the two g2-valued curvature characterizations."""
    w, s = g2.omega, g2.star
    res_omega = Fraction(0)
    for m, n_, sg in itertools.product(range(DIM), repeat=3):
        val = sum(r[m][n_][k][l] * w[k][l][sg] for k, l in itertools.product(range(DIM), repeat=2))
        res_omega = max(res_omega, abs(val))
    res_star = Fraction(0)
    for m, n_, k, l in itertools.product(range(DIM), repeat=4):
        val = 2 * r[m][n_][k][l] - sum(
            s[m][n_][a][b] * r[a][b][k][l] for a, b in itertools.product(range(DIM), repeat=2)
        )
        res_star = max(res_star, abs(val))
    return {"omega_contraction": res_omega, "star_characterization": res_star}


def random_g2_curvature(g2: G2Structure, rng, bound=4):
    """Seeded pair-symmetric g2-valued curvature tensor (the interface stub)."""
    raw = [[[[0] * DIM for _ in range(DIM)] for _ in range(DIM)] for _ in range(DIM)]
    for (a, b) in PAIRS:
        for (c, d) in PAIRS:
            if (a, b) <= (c, d):
                v = Fraction(rng.randint(-bound, bound))
                for (i, j, sij) in ((a, b, 1), (b, a, -1)):
                    for (k, l, skl) in ((c, d, 1), (d, c, -1)):
                        raw[i][j][k][l] = v * sij * skl
                        raw[k][l][i][j] = v * sij * skl
    return g2_project_curvature(g2, raw)
