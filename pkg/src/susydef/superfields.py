"""The superfunction algebra Lambda S with polynomial coefficients, the
Derivation data model for deformed vector fields, and the q-graded
bracket engine with two cross-validating backends.

A SuperForm is a sparse sum of words e_{i1} ^ ... ^ e_{ik} (strictly
increasing spinor indices) with polynomial coefficients in the flat
frame coordinates.  A Derivation is a finite list of terms
q^p * coeff (x) slot with slot either a frame direction ("v", mu),
acting as the connection derivation D_mu, or a basis spinor ("s", j),
acting as C-interior multiplication.  End(S) never appears as a slot:
endomorphism intermediates are re-expressed through the splitting by
endo_to_derivation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exactla import ExactMatrix, GaussianRational, ONE, ZERO, gr
from .grading import TermDegree, filtration_index, mass_dimension

# interior-product sign convention; "koszul" is the one that survives
# eq. (ji) plus the Jacobi suite (the alternative is kept for the
# negative test)
INTERIOR_SIGN_MODE = "koszul"


class TruncationOverflow(Exception):
    """A result needed form or q degrees beyond the configured caps."""


class ProbeSetInsufficient(Exception):
    """Operator-backend reconstruction was underdetermined at the caps."""


# ---------------------------------------------------------------------------
# polynomials in the frame coordinates


class Poly:
    """Sparse polynomial in n coordinates with Gaussian-rational coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        for e, c in (terms or {}).items():
            c = gr(c)
            if not c.is_zero():
                clean[tuple(e)] = c
        self.terms = clean

    @staticmethod
    def const(n, c) -> "Poly":
        return Poly(n, {(0,) * n: gr(c)})

    @staticmethod
    def coord(n, mu) -> "Poly":
        e = [0] * n
        e[mu] = 1
        return Poly(n, {tuple(e): ONE})

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, ZERO) + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return Poly(self.n, out)

    def __neg__(self):
        return Poly(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return self.scale(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(self.n, out)

    def scale(self, c) -> "Poly":
        c = gr(c)
        return Poly(self.n, {e: x * c for e, x in self.terms.items()})

    def diff(self, mu) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[mu]:
                e2 = list(e)
                e2[mu] -= 1
                out[tuple(e2)] = c * gr(e[mu])
        return Poly(self.n, out)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def const_value(self) -> GaussianRational:
        return self.terms.get((0,) * self.n, ZERO)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"x{m}^{p}" if p > 1 else f"x{m}" for m, p in enumerate(e) if p)
            bits.append(f"({c})" + (f"*{mono}" if mono else ""))
        return "+".join(bits)


def _merge_word(word):
    """Sort a spinor word; returns (sign, sorted tuple) or (0, None) on repeats."""
    word = list(word)
    sign = 1
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            word[j - 1], word[j] = word[j], word[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(word)):
        if word[i - 1] == word[i]:
            return 0, None
    return sign, tuple(word)


class SuperForm:
    """Sparse element of Lambda S with polynomial coefficients."""

    __slots__ = ("dim_s", "n_coords", "terms", "cap", "truncated")

    def __init__(self, dim_s, n_coords, terms=None, cap=None, truncated=False):
        self.dim_s = dim_s
        self.n_coords = n_coords
        self.cap = dim_s if cap is None else min(cap, dim_s)
        self.truncated = truncated
        clean = {}
        for w, p in (terms or {}).items():
            if isinstance(p, GaussianRational) or isinstance(p, (int, Fraction, str)):
                p = Poly.const(n_coords, gr(p))
            if not p.is_zero():
                clean[tuple(w)] = p
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(dim_s, n_coords, cap=None) -> "SuperForm":
        return SuperForm(dim_s, n_coords, {}, cap)

    @staticmethod
    def scalar(dim_s, n_coords, c, cap=None) -> "SuperForm":
        return SuperForm(dim_s, n_coords, {(): Poly.const(n_coords, gr(c))}, cap)

    @staticmethod
    def coordinate(dim_s, n_coords, mu, cap=None) -> "SuperForm":
        return SuperForm(dim_s, n_coords, {(): Poly.coord(n_coords, mu)}, cap)

    @staticmethod
    def from_spinor(dim_s, n_coords, v, cap=None) -> "SuperForm":
        terms = {}
        for j, c in enumerate(v):
            c = gr(c)
            if not c.is_zero():
                terms[(j,)] = Poly.const(n_coords, c)
        return SuperForm(dim_s, n_coords, terms, cap)

    def _like(self, terms, truncated=None) -> "SuperForm":
        return SuperForm(
            self.dim_s,
            self.n_coords,
            terms,
            self.cap,
            self.truncated if truncated is None else truncated,
        )

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for w, p in other.terms.items():
            s = out.get(w)
            s = p if s is None else s + p
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
        return SuperForm(
            self.dim_s,
            self.n_coords,
            out,
            min(self.cap, other.cap),
            self.truncated or other.truncated,
        )

    def __neg__(self):
        return self._like({w: -p for w, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SuperForm":
        c = gr(c)
        return self._like({w: p.scale(c) for w, p in self.terms.items()})

    def scale_poly(self, poly: Poly) -> "SuperForm":
        return self._like({w: p * poly for w, p in self.terms.items()})

    def wedge(self, other) -> "SuperForm":
        out = {}
        truncated = self.truncated or other.truncated
        cap = min(self.cap, other.cap)
        for w1, p1 in self.terms.items():
            for w2, p2 in other.terms.items():
                if len(w1) + len(w2) > cap:
                    truncated = True
                    continue
                sign, w = _merge_word(w1 + w2)
                if sign == 0:
                    continue
                p = p1 * p2
                if sign < 0:
                    p = -p
                s = out.get(w)
                s = p if s is None else s + p
                if s.is_zero():
                    out.pop(w, None)
                else:
                    out[w] = s
        return SuperForm(self.dim_s, self.n_coords, out, cap, truncated)

    def interior(self, c_row, sign_mode=None) -> "SuperForm":
        """Interior product with the covector c_row (already C-contracted):
        iota(e_{i1}^...^e_{ik}) = sum_j sign * c_row[i_j] * (word minus i_j).
        """
        sign_mode = sign_mode or INTERIOR_SIGN_MODE
        out = {}
        for w, p in self.terms.items():
            for pos, j in enumerate(w):
                c = c_row[j]
                if c.is_zero():
                    continue
                s = (-1) ** pos if sign_mode == "koszul" else 1
                w2 = w[:pos] + w[pos + 1 :]
                q = p.scale(c if s > 0 else -c)
                acc = out.get(w2)
                acc = q if acc is None else acc + q
                if acc.is_zero():
                    out.pop(w2, None)
                else:
                    out[w2] = acc
        return self._like(out)

    def endo_action(self, m: ExactMatrix) -> "SuperForm":
        """Degree-zero derivation extension of an endomorphism of S."""
        cols = [
            [(i, m.entry(i, j)) for i in range(m.rows) if not m.entry(i, j).is_zero()]
            for j in range(m.cols)
        ]
        return self.endo_action_cols(cols)

    def endo_action_cols(self, cols) -> "SuperForm":
        out = {}
        for w, p in self.terms.items():
            for pos, j in enumerate(w):
                for i, c in cols[j]:
                    sign, w2 = _merge_word(w[:pos] + (i,) + w[pos + 1 :])
                    if sign == 0:
                        continue
                    q = p.scale(c if sign > 0 else -c)
                    acc = out.get(w2)
                    acc = q if acc is None else acc + q
                    if acc.is_zero():
                        out.pop(w2, None)
                    else:
                        out[w2] = acc
        return self._like(out)

    def diff(self, mu) -> "SuperForm":
        out = {}
        for w, p in self.terms.items():
            d = p.diff(mu)
            if not d.is_zero():
                out[w] = d
        return self._like(out)

    # -- structure ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, SuperForm):
            return NotImplemented
        return (self - other).is_zero()

    def degrees(self):
        return sorted({len(w) for w in self.terms})

    def degree_part(self, k) -> "SuperForm":
        return self._like({w: p for w, p in self.terms.items() if len(w) == k})

    def parity_part(self, parity) -> "SuperForm":
        return self._like({w: p for w, p in self.terms.items() if len(w) % 2 == parity})

    def is_constant(self) -> bool:
        return all(p.is_constant() for p in self.terms.values())

    def max_poly_degree(self) -> int:
        return max((p.degree() for p in self.terms.values()), default=0)

    def spinor_vector(self):
        """Inverse of from_spinor (requires a constant pure 1-form)."""
        v = [ZERO] * self.dim_s
        for w, p in self.terms.items():
            if len(w) != 1 or not p.is_constant():
                raise ValueError("not a constant spinor form")
            v[w[0]] = p.const_value()
        return tuple(v)

    def to_json(self):
        return sorted(
            (
                list(w),
                sorted((list(e), str(c)) for e, c in p.terms.items()),
            )
            for w, p in self.terms.items()
        )

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for w in sorted(self.terms):
            word = "^".join(f"e{j}" for j in w) or "1"
            bits.append(f"({self.terms[w]!r}){word}")
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# derivations


VECTOR, SPINOR = "v", "s"


@dataclass(frozen=True)
class Slot:
    kind: str
    index: int

    def __repr__(self):
        return f"D_{self.index}" if self.kind == VECTOR else f"iota_{self.index}"


class Derivation:
    """q-graded sum of terms coeff (x) slot with coeff in Lambda S."""

    __slots__ = ("dim_s", "n_coords", "terms", "q_max", "q_truncated")

    def __init__(self, dim_s, n_coords, terms=None, q_max=None, q_truncated=False):
        self.dim_s = dim_s
        self.n_coords = n_coords
        self.q_max = q_max
        self.q_truncated = q_truncated
        clean = {}
        for (p, slot), form in (terms or {}).items():
            if form.is_zero():
                continue
            key = (p, slot)
            clean[key] = form if key not in clean else clean[key] + form
        self.terms = {k: v for k, v in clean.items() if not v.is_zero()}

    @staticmethod
    def zero(bg) -> "Derivation":
        return Derivation(bg.rep.dim_s, bg.n)

    def _like(self, terms, q_truncated=None) -> "Derivation":
        return Derivation(
            self.dim_s,
            self.n_coords,
            terms,
            self.q_max,
            self.q_truncated if q_truncated is None else q_truncated,
        )

    def __add__(self, other):
        out = dict(self.terms)
        for k, f in other.terms.items():
            out[k] = out[k] + f if k in out else f
        return Derivation(
            self.dim_s, self.n_coords, out, self.q_max, self.q_truncated or other.q_truncated
        )

    def __neg__(self):
        return self._like({k: -f for k, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Derivation":
        return self._like({k: f.scale(c) for k, f in self.terms.items()})

    def q_shift(self, dp) -> "Derivation":
        return self._like({(p + dp, s): f for (p, s), f in self.terms.items()})

    def mod_q(self, k) -> "Derivation":
        return self._like({(p, s): f for (p, s), f in self.terms.items() if p < k})

    def q_part(self, k) -> "Derivation":
        return self._like({(p, s): f for (p, s), f in self.terms.items() if p == k})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return (self - other).is_zero()

    # -- grading metadata ------------------------------------------------------

    def term_degrees(self):
        out = []
        for (p, slot), form in self.terms.items():
            for k in form.degrees():
                out.append(TermDegree(p, k, slot.kind))
        return out

    def parity(self):
        pars = {t.parity for t in self.term_degrees()}
        if len(pars) == 1:
            return pars.pop()
        return None

    def mass_dimension(self):
        dims = {mass_dimension(t) for t in self.term_degrees()}
        if len(dims) == 1:
            return dims.pop()
        return None

    def in_def_q_z(self) -> bool:
        return all(
            filtration_index(TermDegree(0, t.form_degree, t.slot), "Z") <= t.q_power
            for t in self.term_degrees()
        )

    # -- serialization -----------------------------------------------------------

    def to_json(self):
        items = [
            {"q_power": p, "slot": [slot.kind, slot.index], "coeff": form.to_json()}
            for (p, slot), form in self.terms.items()
        ]
        items.sort(key=lambda d: (d["q_power"], d["slot"]))
        return {"terms": items, "q_truncated": self.q_truncated}

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (p, slot) in sorted(self.terms, key=lambda k: (k[0], k[1].kind, k[1].index)):
            form = self.terms[(p, slot)]
            q = "" if p == 0 else ("q" if p == 1 else f"q^{{{p}}}")
            sl = (
                f"D_{{{slot.index}}}"
                if slot.kind == VECTOR
                else f"\\jmath(\\theta_{{{slot.index}}})"
            )
            coeffs = []
            for w in sorted(form.terms):
                word = r" \wedge ".join(f"e_{{{j}}}" for j in w) if w else "1"
                coeffs.append(f"({form.terms[w]!r})\\, {word}")
            bits.append(f"{q}\\big[" + " + ".join(coeffs) + f"\\big] \\otimes {sl}")
        return " + ".join(bits)

    def __repr__(self):
        if not self.terms:
            return "Derivation(0)"
        bits = [
            f"q^{p} ({form!r}) (x) {slot!r}"
            for (p, slot), form in sorted(
                self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1].kind, kv[0][1].index)
            )
        ]
        return "Derivation[" + " + ".join(bits) + "]"


# ---------------------------------------------------------------------------
# term builders


def vector_term(bg, p, form, mu) -> Derivation:
    return Derivation(bg.rep.dim_s, bg.n, {(p, Slot(VECTOR, mu)): form})


def spinor_term(bg, p, form, theta) -> Derivation:
    """theta an index or a spinor vector (expanded over the basis)."""
    if isinstance(theta, int):
        return Derivation(bg.rep.dim_s, bg.n, {(p, Slot(SPINOR, theta)): form})
    terms = {}
    for j, c in enumerate(theta):
        c = gr(c)
        if c.is_zero():
            continue
        key = (p, Slot(SPINOR, j))
        add = form.scale(c)
        terms[key] = terms[key] + add if key in terms else add
    return Derivation(bg.rep.dim_s, bg.n, terms)


def j_vector(bg, components, p=0) -> Derivation:
    """ja(X) for a constant frame vector X."""
    terms = {}
    one = SuperForm.scalar(bg.rep.dim_s, bg.n, 1)
    for mu, c in enumerate(components):
        c = gr(c)
        if not c.is_zero():
            terms[(p, Slot(VECTOR, mu))] = one.scale(c)
    return Derivation(bg.rep.dim_s, bg.n, terms)


def j_spinor(bg, phi, p=0) -> Derivation:
    """ja(phi): interior multiplication by the constant spinor phi."""
    one = SuperForm.scalar(bg.rep.dim_s, bg.n, 1)
    return spinor_term(bg, p, one, tuple(phi))


def endo_to_derivation(bg, phi: ExactMatrix, prefactor=None, p=0) -> Derivation:
    """Splitting image of (prefactor ^ derivation-extension of phi).

    phi = sum_t (column_t of phi C^{-1}) (x) C(theta_t, .), so the result
    is sum_t (prefactor ^ f_t) (x) iota_{theta_t}; exact, no Fierz needed.
    """
    f = phi @ bg.rep.c_inv
    terms = {}
    for t in range(bg.rep.dim_s):
        col = tuple(f.entry(s, t) for s in range(bg.rep.dim_s))
        if all(c.is_zero() for c in col):
            continue
        form = SuperForm.from_spinor(bg.rep.dim_s, bg.n, col)
        if prefactor is not None:
            form = prefactor.wedge(form)
        if form.is_zero():
            continue
        key = (p, Slot(SPINOR, t))
        terms[key] = terms[key] + form if key in terms else form
    return Derivation(bg.rep.dim_s, bg.n, terms)


# ---------------------------------------------------------------------------
# action on superfunctions


_SF_CACHE = {}


def _bg_cache(bg):
    cache = _SF_CACHE.get(id(bg))
    if cache is None or cache[0] is not bg:
        cache = (bg, {})
        _SF_CACHE[id(bg)] = cache
    return cache[1]


def slot_apply(bg, slot: Slot, f: SuperForm) -> SuperForm:
    """Action of a basis slot on a superfunction."""
    cache = _bg_cache(bg)
    if slot.kind == VECTOR:
        if bg.model == "homogeneous" and not f.is_constant():
            raise ValueError("homogeneous model restricts to constant sections")
        key = ("cols", slot.index)
        if key not in cache:
            m = bg.conn[slot.index]
            cache[key] = [
                [(i, m.entry(i, j)) for i in range(m.rows) if not m.entry(i, j).is_zero()]
                for j in range(m.cols)
            ]
        return f.diff(slot.index) + f.endo_action_cols(cache[key])
    key = ("crow", slot.index)
    if key not in cache:
        cache[key] = tuple(bg.rep.c_matrix.row(slot.index))
    return f.interior(cache[key])


def c_row(bg, phi):
    """C(phi, .) as a covector on basis spinors."""
    out = []
    for j in range(bg.rep.dim_s):
        s = ZERO
        for i, c in enumerate(phi):
            c = gr(c)
            if not c.is_zero():
                s = s + c * bg.rep.c_matrix.entry(i, j)
        out.append(s)
    return tuple(out)


def apply_derivation(bg, d: Derivation, f: SuperForm, q_max=None) -> dict:
    """Apply d to a superfunction; returns {q_power: SuperForm}."""
    out = {}
    for (p, slot), coeff in d.terms.items():
        if q_max is not None and p > q_max:
            continue
        val = coeff.wedge(slot_apply(bg, slot, f))
        if val.is_zero():
            continue
        out[p] = out[p] + val if p in out else val
    return {p: v for p, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------------------
# the structural bracket


def _slot_parity(slot: Slot) -> int:
    return 0 if slot.kind == VECTOR else 1


def bracket_structural(bg, d1: Derivation, d2: Derivation, q_max=None) -> Derivation:
    """Graded bracket via the fundamental commutation rules.

    [a (x) P, b (x) Q] = a ^ P(b) (x) Q - (-1)^{|T1||T2|} b ^ Q(a) (x) P
                         + (-1)^{|P||b|} a ^ b (x) [P, Q]
    with [D_mu, D_nu] = R_mu_nu + c_{mu nu}^kappa D_kappa (the curvature
    re-expressed through endo_to_derivation), [D_mu, iota_j] =
    iota_{N_mu theta_j} and [iota, iota] = 0.
    """
    q_max = q_max if q_max is not None else (d1.q_max or d2.q_max)
    out = Derivation(d1.dim_s, d1.n_coords, q_max=q_max)
    truncated = d1.q_truncated or d2.q_truncated
    for (p1, s1), a_full in d1.terms.items():
        for (p2, s2), b_full in d2.terms.items():
            p = p1 + p2
            if q_max is not None and p > q_max:
                truncated = True
                continue
            for pa in (0, 1):
                a = a_full.parity_part(pa)
                if a.is_zero():
                    continue
                t1 = (pa + _slot_parity(s1)) % 2
                for pb in (0, 1):
                    b = b_full.parity_part(pb)
                    if b.is_zero():
                        continue
                    t2 = (pb + _slot_parity(s2)) % 2
                    piece = _bracket_pair(bg, a, s1, b, s2, t1, t2)
                    out = out + piece.q_shift(p)
    return Derivation(out.dim_s, out.n_coords, out.terms, q_max, truncated)


def _bracket_pair(bg, a, s1, b, s2, t1, t2) -> Derivation:
    terms = {}

    def add(form, slot):
        if form.is_zero():
            return
        key = (0, slot)
        terms[key] = terms[key] + form if key in terms else form

    # a ^ P(b) (x) Q
    add(a.wedge(slot_apply(bg, s1, b)), s2)
    # -(-1)^{t1 t2} b ^ Q(a) (x) P
    qa = b.wedge(slot_apply(bg, s2, a))
    if (t1 * t2) % 2 == 0:
        qa = -qa
    add(qa, s1)
    out = Derivation(a.dim_s, a.n_coords, terms)
    # +(-1)^{|P| |b|} a ^ b (x) [P, Q]
    sign = -1 if (_slot_parity(s1) * len_parity(b)) % 2 else 1
    ab = a.wedge(b)
    if not ab.is_zero():
        out = out + _slot_bracket(bg, s1, s2, ab).scale(gr(sign))
    return out


def len_parity(form: SuperForm) -> int:
    degs = {k % 2 for k in form.degrees()}
    if len(degs) > 1:
        raise ValueError("parity-mixed coefficient in signed context")
    return degs.pop() if degs else 0


def _slot_bracket(bg, s1: Slot, s2: Slot, prefactor: SuperForm) -> Derivation:
    if s1.kind == VECTOR and s2.kind == VECTOR:
        mu, nu = s1.index, s2.index
        out = endo_to_derivation(bg, bg.curvature(mu, nu), prefactor)
        terms = dict(out.terms)
        for kappa in range(bg.n):
            c = bg.c_struct(mu, nu, kappa)
            if not c.is_zero():
                key = (0, Slot(VECTOR, kappa))
                add = prefactor.scale(c)
                terms[key] = terms[key] + add if key in terms else add
        return Derivation(out.dim_s, out.n_coords, terms)
    if s1.kind == VECTOR and s2.kind == SPINOR:
        v = bg.n_matrices[s1.index].mat_vec(
            tuple(ONE if j == s2.index else ZERO for j in range(bg.rep.dim_s))
        )
        return spinor_term(bg, 0, prefactor, v)
    if s1.kind == SPINOR and s2.kind == VECTOR:
        v = bg.n_matrices[s2.index].mat_vec(
            tuple(ONE if j == s1.index else ZERO for j in range(bg.rep.dim_s))
        )
        return -spinor_term(bg, 0, prefactor, v)
    return Derivation(bg.rep.dim_s, bg.n)


# ---------------------------------------------------------------------------
# operator backend (flat model only)


def bracket_operator(bg, d1: Derivation, d2: Derivation, q_max=None, p_form=None, p_poly=2) -> Derivation:
    """Brute-force bracket: act on probes and reconstruct the derivation.

    Flat model only.  The graded commutator d1 d2 -(-1)^{|d1||d2|} d2 d1
    is evaluated on the probes x^nu * m and m (m a Lambda S monomial up
    to the form cap); the unique derivation with those actions is then
    reconstructed and re-verified on every probe.
    """
    if bg.model != "flat":
        raise ValueError("operator backend requires the flat model")
    par1, par2 = d1.parity(), d2.parity()
    if par1 is None or par2 is None:
        raise ValueError("operator backend requires parity-homogeneous inputs")
    q_max = q_max if q_max is not None else (d1.q_max or d2.q_max)
    dim_s, n = d1.dim_s, d1.n_coords
    p_form = p_form if p_form is not None else min(dim_s, 4)
    sign = -1 if (par1 * par2) % 2 else 1

    def commutator(f: SuperForm) -> dict:
        out = {}
        for p2, g in apply_derivation(bg, d2, f, q_max).items():
            rest = q_max - p2 if q_max is not None else None
            for p1, h in apply_derivation(bg, d1, g, rest).items():
                p = p1 + p2
                out[p] = out.get(p, SuperForm.zero(dim_s, n)) + h
        for p1, g in apply_derivation(bg, d1, f, q_max).items():
            rest = q_max - p1 if q_max is not None else None
            for p2, h in apply_derivation(bg, d2, g, rest).items():
                p = p1 + p2
                h = h.scale(-sign)
                out[p] = out.get(p, SuperForm.zero(dim_s, n)) + h
        return {p: v for p, v in out.items() if not v.is_zero()}

    # vector-slot coefficients from probes x^nu
    terms = {}
    for nu in range(n):
        probe = SuperForm.coordinate(dim_s, n, nu)
        for p, val in commutator(probe).items():
            # subtract x^nu * T(1); T(1) = 0 for derivations
            key = (p, Slot(VECTOR, nu))
            terms[key] = terms[key] + val if key in terms else val
    partial = Derivation(dim_s, n, terms, q_max)
    # spinor-slot coefficients from constant spinor probes
    c_inv_t = bg.rep.c_inv.transpose()
    b_values = {}
    for s in range(dim_s):
        probe = SuperForm.from_spinor(dim_s, n, tuple(ONE if j == s else ZERO for j in range(dim_s)))
        got = commutator(probe)
        rest = apply_derivation(bg, partial, probe, q_max)
        for p in set(got) | set(rest):
            val = got.get(p, SuperForm.zero(dim_s, n)) - rest.get(p, SuperForm.zero(dim_s, n))
            if not val.is_zero():
                b_values[(p, s)] = val
    for (p, s), val in list(b_values.items()):
        for t in range(dim_s):
            c = c_inv_t.entry(t, s)
            if c.is_zero():
                continue
            key = (p, Slot(SPINOR, t))
            add = val.scale(c)
            terms[key] = terms[key] + add if key in terms else add
    rec = Derivation(dim_s, n, terms, q_max)
    # verification pass over the full probe set
    words = []
    for k in range(0, p_form + 1):
        words.extend(itertools.combinations(range(dim_s), k))
    for w in words:
        for extra in [None] + list(range(n)):
            f = SuperForm(dim_s, n, {w: Poly.const(n, 1)})
            if extra is not None:
                f = f.scale_poly(Poly.coord(n, extra))
            want = commutator(f)
            got = apply_derivation(bg, rec, f, q_max)
            keys = set(want) | set(got)
            for p in keys:
                if want.get(p, SuperForm.zero(dim_s, n)) != got.get(p, SuperForm.zero(dim_s, n)):
                    raise ProbeSetInsufficient(
                        f"reconstruction mismatch on probe {w} x^{extra} at q^{p}"
                    )
    return rec


# ---------------------------------------------------------------------------
# sampling helpers


def generator_terms(bg, max_degree=None):
    """Single-term generator derivations for compatibility sampling."""
    dim_s, n = bg.rep.dim_s, bg.n
    max_degree = max_degree if max_degree is not None else min(dim_s, 3)
    out = []
    for k in range(0, max_degree + 1):
        for w in itertools.combinations(range(dim_s), k):
            form = SuperForm(dim_s, n, {w: Poly.const(n, 1)})
            for mu in range(n):
                out.append(vector_term(bg, 0, form, mu))
            for j in range(dim_s):
                out.append(spinor_term(bg, 0, form, j))
    return out
