"""Pointwise assembly of the symmetric-hyperbolic coefficient matrices.

Component ordering of the primary unknown is U = (q, v_1..v_d, H_1..H_d, S),
so every matrix has order 2d + 2.  Two branches are provided:

* non-relativistic: A_0, A_i in the total-pressure variables, with the
  1/(rho a^2) and H-tensor blocks;
* relativistic: B_alpha in V = (p, w, H, S) with w = Gamma v, pulled back
  to the U variables through the Jacobian J = dV/dU, A_alpha = J^T B_alpha J.

Entries are built with plain scalar arithmetic on "scalar-like" values:
floats, numpy arrays broadcast over grid axes, or TimeJets.  That single
code path serves pointwise tests, vectorized field assembly inside the
solvers, and the Taylor-in-time trace recursion.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .eos import EosModel, check_admissible
from .errors import AdmissibilityViolation, DegenerateLifting, SuperluminalInput
from .jets import TimeJet

# ---------------------------------------------------------------------------
# generic matrix-of-scalars helpers


def zeros_entries(n):
    return [[0.0 for _ in range(n)] for _ in range(n)]


def eye_entries(n):
    m = zeros_entries(n)
    for i in range(n):
        m[i][i] = 1.0
    return m


def _is_zero(x):
    return isinstance(x, float) and x == 0.0


def mat_t(a):
    n = len(a)
    return [[a[j][i] for j in range(n)] for i in range(n)]


def mat_add(a, b):
    n = len(a)
    return [[a[i][j] + b[i][j] for j in range(n)] for i in range(n)]


def mat_sub(a, b):
    n = len(a)
    return [[a[i][j] - b[i][j] for j in range(n)] for i in range(n)]


def mat_scale(s, a):
    n = len(a)
    return [[(0.0 if _is_zero(a[i][j]) else s * a[i][j]) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n = len(a)
    out = zeros_entries(n)
    for i in range(n):
        for k in range(n):
            aik = a[i][k]
            if _is_zero(aik):
                continue
            for j in range(n):
                bkj = b[k][j]
                if _is_zero(bkj):
                    continue
                out[i][j] = aik * bkj if _is_zero(out[i][j]) else out[i][j] + aik * bkj
    return out


def mat_vec(a, x):
    n = len(a)
    out = []
    for i in range(n):
        acc = None
        for j in range(n):
            aij = a[i][j]
            if _is_zero(aij):
                continue
            term = aij * x[j]
            acc = term if acc is None else acc + term
        out.append(0.0 * x[i] if acc is None else acc)
    return out


def entries_to_array(a):
    """Stack an entry matrix of floats/arrays into shape (n, n, *grid)."""
    n = len(a)
    shape = ()
    for row in a:
        for e in row:
            if np.ndim(e):
                shape = np.broadcast_shapes(shape, np.shape(e))
    out = np.zeros((n, n) + shape)
    for i in range(n):
        for j in range(n):
            out[i, j] = a[i][j]
    return out


# ---------------------------------------------------------------------------
# state packing


def split_state(U, d):
    """U with component axis first -> (q, [v_i], [H_i], S)."""
    q = U[0]
    v = [U[1 + i] for i in range(d)]
    H = [U[1 + d + i] for i in range(d)]
    S = U[2 * d + 1]
    return q, v, H, S


def pack_state(q, v, H, S):
    return np.concatenate([np.asarray(q)[None], np.stack(v), np.stack(H),
                           np.asarray(S)[None]], axis=0)


def _dot(x, y):
    acc = x[0] * y[0]
    for a, b in zip(x[1:], y[1:]):
        acc = acc + a * b
    return acc


def nonrel_pressure(q, H):
    return q - 0.5 * _dot(H, H)


# ---------------------------------------------------------------------------
# non-relativistic branch


def nonrel_entries(q, v, H, S, model: EosModel):
    """Entry matrices (A_0, [A_1..A_d]) of the total-pressure symmetric form."""
    d = len(v)
    nc = 2 * d + 2
    p = nonrel_pressure(q, H)
    rho = model.rho(p, S)
    a2 = model.a2(p, S)
    ra2 = 1.0 / (rho * a2)

    a0 = zeros_entries(nc)
    a0[0][0] = ra2
    for i in range(d):
        a0[0][1 + d + i] = -ra2 * H[i]
        a0[1 + d + i][0] = -ra2 * H[i]
        a0[1 + i][1 + i] = rho
        for j in range(d):
            hh = ra2 * H[i] * H[j]
            a0[1 + d + i][1 + d + j] = (1.0 + hh) if i == j else hh
    a0[nc - 1][nc - 1] = 1.0

    ais = []
    for i in range(d):
        ai = zeros_entries(nc)
        vi = v[i]
        ai[0][0] = vi * ra2
        ai[0][1 + i] = 1.0
        ai[1 + i][0] = 1.0
        for j in range(d):
            ai[0][1 + d + j] = -vi * ra2 * H[j]
            ai[1 + d + j][0] = -vi * ra2 * H[j]
            ai[1 + j][1 + j] = rho * vi
            ai[1 + j][1 + d + j] = -H[i]
            ai[1 + d + j][1 + j] = -H[i]
            for k in range(d):
                hh = vi * ra2 * H[j] * H[k]
                ai[1 + d + j][1 + d + k] = (vi + hh) if j == k else hh
        ai[nc - 1][nc - 1] = vi
        ais.append(ai)
    return a0, ais


# ---------------------------------------------------------------------------
# relativistic branch


def rel_kinematics(q, v, H, model: EosModel):
    """Shared relativistic scalars: Gamma, v.H, |b|^2, fluid pressure p."""
    eps = model.eps_c
    v2 = _dot(v, v)
    Gamma = (1.0 - eps ** 2 * v2) ** -0.5
    vH = _dot(v, H)
    H2 = _dot(H, H)
    b2 = eps ** 2 * H2 / Gamma ** 2 + eps ** 4 * vH ** 2
    # q = p + (1/2) eps^-2 |b|^2 with the eps^-2 |b|^2 written out explicitly
    p = q - 0.5 * (H2 / Gamma ** 2 + eps ** 2 * vH ** 2)
    return Gamma, vH, H2, b2, p


def rel_entries(q, v, H, S, model: EosModel):
    """Relativistic assembly: returns (A_entries, B_entries, J_entries, Gamma).

    A_alpha = J^T B_alpha(V) J with V = (p, w, H, S) and J = dV/dU.
    """
    d = len(v)
    nc = 2 * d + 2
    eps = model.eps_c
    Gamma, vH, H2, b2, p = rel_kinematics(q, v, H, model)
    rho = model.rho(p, S)
    a2 = model.a2(p, S)
    h = model.h(p, S)
    iG = 1.0 / Gamma
    rhg = rho * h * Gamma + eps ** 2 * iG * H2
    # column vectors used by the Jacobian and the w-row couplings
    a_vec = [eps ** 2 * (H2 * v[i] - vH * H[i]) for i in range(d)]
    b_vec = [iG ** 2 * H[i] + eps ** 2 * vH * v[i] for i in range(d)]
    g_vec = [iG * (eps ** 2 * vH * H[i] - b2 * v[i]) for i in range(d)]

    def m0(i, j):
        # M_0 = Gamma^-1 (I + eps^2 Gamma^2 v (x) v)
        m = eps ** 2 * Gamma * v[i] * v[j]
        return (m + iG) if i == j else m

    def a0_blk(i, j):
        t = rhg * ((1.0 if i == j else 0.0) - eps ** 2 * v[i] * v[j])
        t = t - eps ** 2 * iG * b2 * v[i] * v[j]
        t = t - eps ** 2 * iG * H[i] * H[j]
        t = t + eps ** 4 * iG * vH * (H[i] * v[j] + v[i] * H[j])
        return t

    b0 = zeros_entries(nc)
    b0[0][0] = Gamma / (rho * a2)
    for i in range(d):
        b0[0][1 + i] = eps ** 2 * v[i]
        b0[1 + i][0] = eps ** 2 * v[i]
        for j in range(d):
            b0[1 + i][1 + j] = a0_blk(i, j)
            b0[1 + d + i][1 + d + j] = m0(i, j)
    b0[nc - 1][nc - 1] = 1.0

    bis = []
    for i in range(d):
        bi = zeros_entries(nc)
        vi = v[i]
        bi[0][0] = Gamma * vi / (rho * a2)
        bi[0][1 + i] = 1.0
        bi[1 + i][0] = 1.0
        for j in range(d):
            for k in range(d):
                t = vi * (rhg * ((1.0 if j == k else 0.0) - eps ** 2 * v[j] * v[k])
                          + eps ** 2 * iG * (b2 * v[j] * v[k] - H[j] * H[k]))
                t = t + eps ** 2 * iG * H[i] * (iG ** 2 * (H[j] * v[k] + v[j] * H[k])
                                                - 2.0 * vH * ((1.0 if j == k else 0.0)
                                                              - eps ** 2 * v[j] * v[k]))
                if k == i:
                    t = t + g_vec[j]
                if j == i:
                    t = t + g_vec[k]
                bi[1 + j][1 + k] = t
            # N_i = (H/Gamma^2 + eps^2 vH v) (x) (e_i - eps^2 v_i v) - (H_i/Gamma^2) I
            for k in range(d):
                n_jk = b_vec[j] * ((1.0 if k == i else 0.0) - eps ** 2 * vi * v[k])
                if j == k:
                    n_jk = n_jk - iG ** 2 * H[i]
                bi[1 + d + j][1 + k] = n_jk
                bi[1 + k][1 + d + j] = n_jk
            for k in range(d):
                bi[1 + d + j][1 + d + k] = vi * m0(j, k)
        bi[nc - 1][nc - 1] = vi
        bis.append(bi)

    jac = eye_entries(nc)
    for i in range(d):
        jac[0][1 + i] = a_vec[i]
        jac[0][1 + d + i] = -b_vec[i]
        for j in range(d):
            jac[1 + i][1 + j] = Gamma ** 2 * m0(i, j)

    jt = mat_t(jac)
    a0 = mat_mul(jt, mat_mul(b0, jac))
    ais = [mat_mul(jt, mat_mul(bi, jac)) for bi in bis]
    return (a0, ais), (b0, bis), jac, Gamma


def system_entries(q, v, H, S, model: EosModel):
    """Branch dispatch used by the solvers; eps_c = 0 is the non-rel branch."""
    if model.eps_c == 0.0:
        return nonrel_entries(q, v, H, S, model)
    (a0, ais), _, _, _ = rel_entries(q, v, H, S, model)
    return a0, ais


# ---------------------------------------------------------------------------
# public array-level API


@dataclass
class SystemMatrices:
    """Dense symmetric coefficient matrices at a point or over a field."""

    a0: np.ndarray
    ai: list
    branch: str

    @property
    def order(self) -> int:
        return self.a0.shape[0]


@dataclass
class BoundaryMatrix:
    a1_tilde: np.ndarray
    inertia: tuple


@dataclass
class WTransform:
    j_ring: np.ndarray
    a_bold: dict
    split: tuple  # (A1^(1), A1^(0))


def _validate_nonrel(q, v, H, S, model):
    p = nonrel_pressure(q, H)
    rho = model.rho(p, S)
    check_admissible(model, rho)
    if np.any(np.asarray(model.a2(p, S)) <= 0.0):
        raise AdmissibilityViolation("a^2 must be positive")


def _validate_rel(q, v, H, S, model):
    eps = model.eps_c
    v2 = sum(np.asarray(vi, dtype=float) ** 2 for vi in v)
    if np.any(eps ** 2 * v2 >= 1.0):
        raise SuperluminalInput("eps_c*|v| >= 1")
    _, _, _, _, p = rel_kinematics(q, v, H, model)
    check_admissible(model, model.rho(p, S))


def assemble_nonrel(U, model: EosModel, d=None) -> SystemMatrices:
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    q, v, H, S = split_state(U, d)
    _validate_nonrel(q, v, H, S, model)
    a0, ais = nonrel_entries(q, v, H, S, model)
    return SystemMatrices(entries_to_array(a0), [entries_to_array(a) for a in ais],
                          branch="NonRel")


def assemble_rel(U, model: EosModel, d=None) -> SystemMatrices:
    """Relativistic assembly; degenerates to the non-relativistic branch at
    eps_c = 0 (the algebraic limit is exact)."""
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    if model.eps_c == 0.0:
        m = assemble_nonrel(U, model, d)
        return SystemMatrices(m.a0, m.ai, branch="Rel")
    q, v, H, S = split_state(U, d)
    _validate_rel(q, v, H, S, model)
    (a0, ais), _, _, _ = rel_entries(q, v, H, S, model)
    return SystemMatrices(entries_to_array(a0), [entries_to_array(a) for a in ais],
                          branch="Rel")


def rel_jacobian(U, model: EosModel, d=None):
    """J = dV/dU and its determinant Gamma^(d+2)."""
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    q, v, H, S = split_state(U, d)
    _validate_rel(q, v, H, S, model)
    _, _, jac, Gamma = rel_entries(q, v, H, S, model)
    return entries_to_array(jac), np.asarray(Gamma) ** (d + 2)


def a1_tilde_entries(a0, ais, dt_phi, grad_phi, d1_phi):
    """(A_1 - dPhi/dt A_0 - sum_i dPhi/dx_i A_i) / d1Phi as entry matrices."""
    acc = mat_sub(ais[0], mat_scale(dt_phi, a0))
    for gp, ai in zip(grad_phi, ais[1:]):
        acc = mat_sub(acc, mat_scale(gp, ai))
    return mat_scale(1.0 / d1_phi, acc)


def lifted_a1(U, grad_phi, dt_phi, d1_phi, model: EosModel, d=None,
              branch=None) -> BoundaryMatrix:
    """Boundary matrix of the lifted problem at a point (or field).

    grad_phi lists the tangential lifting gradients (d2 Phi, ..., dd Phi).
    """
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    if np.any(np.asarray(d1_phi) < 0.5):
        raise DegenerateLifting("d1_Phi < 1/2")
    if branch is None:
        branch = "Rel" if model.eps_c > 0.0 else "NonRel"
    mats = assemble_rel(U, model, d) if branch == "Rel" else assemble_nonrel(U, model, d)
    arr = mats.ai[0] - np.asarray(dt_phi, dtype=float) * mats.a0
    for gp, ai in zip(grad_phi, mats.ai[1:]):
        arr = arr - np.asarray(gp, dtype=float) * ai
    arr = arr / np.asarray(d1_phi, dtype=float)
    inertia = boundary_inertia(arr, 1e-10) if arr.ndim == 2 else None
    return BoundaryMatrix(a1_tilde=arr, inertia=inertia)


def boundary_inertia(m: np.ndarray, zero_tol: float) -> tuple:
    """Eigenvalue sign counts (n_pos, n_neg, n_zero), tolerance-scaled."""
    m = np.asarray(m, dtype=float)
    lam = np.linalg.eigvalsh(0.5 * (m + m.T))
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    tol = zero_tol * scale
    n_pos = int(np.sum(lam > tol))
    n_neg = int(np.sum(lam < -tol))
    return (n_pos, n_neg, lam.size - n_pos - n_neg)


def j_ring_entries(grad_phi, d):
    """The change of basis separating the noncharacteristic pair (J.ring)."""
    nc = 2 * d + 2
    j = eye_entries(nc)
    for i, gp in enumerate(grad_phi):
        j[1][2 + i] = gp
    return j


def boundary_block_matrix(N, d, scale=1.0):
    """The printed boundary form: (0, s N^T; s N, O; ...) of order 2d + 2.

    scale = 1 reproduces the non-relativistic display, scale = Gamma the
    relativistic one."""
    nc = 2 * d + 2
    N = np.asarray(N, dtype=float)
    m = np.zeros((nc, nc) + N.shape[1:])
    for i in range(d):
        m[0, 1 + i] = scale * N[i]
        m[1 + i, 0] = scale * N[i]
    return m


def a1_bold_split(a1_bold: np.ndarray, d: int):
    """Decompose A1_bold into the constant noncharacteristic block + remainder."""
    nc = 2 * d + 2
    a11 = np.zeros((nc, nc) + a1_bold.shape[2:])
    a11[0, 1] = 1.0
    a11[1, 0] = 1.0
    return a11, a1_bold - a11


def w_transform(U, model: EosModel, dt_phi, grad_phi, d1_phi, d=None,
                branch=None) -> WTransform:
    """Build J_ring and the transformed matrices A_bold at a state.

    a_bold keys: 0..d for J^T A_alpha J (alpha = 1 uses the lifted A1~),
    plus the split of A1_bold into its constant boundary block and the
    remainder vanishing at x1 = 0.
    """
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    bm = lifted_a1(U, grad_phi, dt_phi, d1_phi, model, d, branch)
    if branch is None:
        branch = "Rel" if model.eps_c > 0.0 else "NonRel"
    mats = assemble_rel(U, model, d) if branch == "Rel" else assemble_nonrel(U, model, d)
    jr = entries_to_array(j_ring_entries([np.asarray(g, dtype=float) for g in grad_phi], d))
    def sandwich(a):
        return np.einsum("ki...,kl...,lj...->ij...", jr, a, jr)
    a_bold = {0: sandwich(mats.a0), 1: sandwich(bm.a1_tilde)}
    for i in range(2, d + 1):
        a_bold[i] = sandwich(mats.ai[i - 1])
    split = a1_bold_split(a_bold[1], d)
    return WTransform(j_ring=jr, a_bold=a_bold, split=split)


def nonrel_limit_gap(U, model: EosModel, eps_list, d=None):
    """Frobenius gaps ||A_alpha^rel(eps) - A_alpha^nonrel|| and fitted order."""
    U = np.asarray(U, dtype=float)
    d = d if d is not None else (U.shape[0] - 2) // 2
    base = assemble_nonrel(U, replace(model, eps_c=0.0), d)
    rows = []
    for eps in eps_list:
        m = assemble_rel(U, replace(model, eps_c=float(eps)), d)
        gaps = [float(np.linalg.norm(m.a0 - base.a0))]
        gaps += [float(np.linalg.norm(a - b)) for a, b in zip(m.ai, base.ai)]
        rows.append({"eps_c": float(eps), "gaps": gaps, "gap_max": max(gaps)})
    pos = [(r["eps_c"], r["gap_max"]) for r in rows if r["eps_c"] > 0 and r["gap_max"] > 0]
    order = None
    if len(pos) >= 2:
        le = np.log([p[0] for p in pos])
        lg = np.log([p[1] for p in pos])
        order = float(np.polyfit(le, lg, 1)[0])
    return {"rows": rows, "fitted_order": order}


def pd_reduction_terms(p, S, v, H, u, model: EosModel):
    """The two scalars of the positivity reduction of the relativistic A_0.

    T6 >= 0 holds algebraically for any admissible (v, H) and direction u;
    T5 > 0 uses the subluminal sound speed."""
    eps = model.eps_c
    v = np.asarray(v, dtype=float)
    H = np.asarray(H, dtype=float)
    u = np.asarray(u, dtype=float)
    Gamma = 1.0 / np.sqrt(1.0 - eps ** 2 * np.sum(v * v, axis=0))
    rho = model.rho(p, S)
    a2 = model.a2(p, S)
    h = model.h(p, S)
    uu = np.sum(u * u, axis=0)
    vu = np.sum(v * u, axis=0)
    Hu = np.sum(H * u, axis=0)
    vH = np.sum(v * H, axis=0)
    H2 = np.sum(H * H, axis=0)
    t5 = rho * h * Gamma * uu - (eps ** 2 * rho * h * Gamma + eps ** 4 * rho * a2 / Gamma) * vu ** 2
    t6 = (eps ** 2 / Gamma) * (uu * H2 - eps ** 2 * (1.0 + Gamma ** -2) * H2 * vu ** 2
                               - eps ** 4 * vu ** 2 * vH ** 2 - Hu ** 2
                               + 2.0 * eps ** 2 * vH * vu * Hu)
    return t5, t6


# ---------------------------------------------------------------------------
# relativistic conservative-form residuals (Appendix-B equivalence check)


def _rel_funcs_of_V(V, model: EosModel):
    """Scalars as functions of V = (p, w, H, S); works on jets for JVPs."""
    d = (len(V) - 2) // 2
    eps = model.eps_c
    p = V[0]
    w = [V[1 + i] for i in range(d)]
    H = [V[1 + d + i] for i in range(d)]
    S = V[2 * d + 1]
    Gamma = (1.0 + eps ** 2 * _dot(w, w)) ** 0.5
    v = [wi / Gamma for wi in w]
    vH = _dot(v, H)
    H2 = _dot(H, H)
    rho = model.rho(p, S)
    h = model.h(p, S)
    q = p + 0.5 * (H2 / Gamma ** 2 + eps ** 2 * vH ** 2)
    return d, eps, p, w, H, S, Gamma, v, vH, H2, rho, h, q


def _rel_conserved_densities(V, model: EosModel):
    """Time densities and flux matrix for the conservative system.

    Returns (mass, energy, momentum[d], fluxes) where fluxes[j] is the list
    of x_j-fluxes ordered like the densities, plus the induction pair and
    the entropy transport handled separately in conservative_residual_rel.
    """
    d, eps, p, w, H, S, Gamma, v, vH, H2, rho, h, q = _rel_funcs_of_V(V, model)
    mass = rho * Gamma
    rhw = rho * h * Gamma ** 2
    energy = rhw + eps ** 2 * H2 - eps ** 2 * q
    mom = [rhw * v[i] + eps ** 2 * H2 * v[i] - eps ** 2 * vH * H[i] for i in range(d)]
    flux = []
    for j in range(d):
        fj = [mass * v[j],
              rhw * v[j] + eps ** 2 * H2 * v[j] - eps ** 2 * vH * H[j]]
        for i in range(d):
            t = -H[i] * H[j] / Gamma ** 2 + (rhw + eps ** 2 * H2) * v[i] * v[j] \
                - eps ** 2 * vH * (H[i] * v[j] + v[i] * H[j])
            if i == j:
                t = t + q
            fj.append(t)
        flux.append(fj)
    return [mass, energy] + mom, flux


def _jvp(fn, V, dV):
    """Directional derivative of fn at V along dV via order-1 jets."""
    jV = [TimeJet([np.asarray(x, dtype=float), np.asarray(dx, dtype=float)])
          for x, dx in zip(V, dV)]
    out = fn(jV)

    def dpart(y):
        return y.coeff(1) if isinstance(y, TimeJet) else np.zeros_like(np.asarray(y, float))
    if isinstance(out, (list, tuple)):
        return [dpart(y) for y in out]
    return dpart(out)


def conservative_residual_rel(V, dV, model: EosModel):
    """Residuals of the conservative system and of the symmetric form.

    V is the pointwise state (p, w, H, S); dV[alpha] its derivative along
    t (alpha = 0) and x_1..x_d.  Returns (cons, sym) where cons stacks the
    residuals of mass, energy, momentum, induction, entropy transport, and
    sym = B_0 dV/dt + B_i dV/dx_i.  The equivalence needs div H = 0.
    """
    V = [np.asarray(x, dtype=float) for x in V]
    d = (len(V) - 2) // 2
    eps = model.eps_c
    if eps <= 0.0:
        raise ValueError("relativistic residuals need eps_c > 0")
    wvec = [V[1 + i] for i in range(d)]

    dens_flux = lambda X: _rel_conserved_densities(X, model)[0]
    cons = list(_jvp(dens_flux, V, dV[0]))
    for j in range(d):
        flux_j = lambda X, jj=j: _rel_conserved_densities(X, model)[1][jj]
        dfj = _jvp(flux_j, V, dV[1 + j])
        cons = [c + g for c, g in zip(cons, dfj)]

    # induction: dH/dt - curl(v x H) in the d = 2 / d = 3 conventions
    def vxH(X):
        dd, _, _, w, H, _, Gamma, v, _, _, _, _, _ = _rel_funcs_of_V(X, model)
        if dd == 2:
            return [v[0] * H[1] - v[1] * H[0]]
        return [v[1] * H[2] - v[2] * H[1],
                v[2] * H[0] - v[0] * H[2],
                v[0] * H[1] - v[1] * H[0]]

    dH_dt = [dV[0][1 + d + i] for i in range(d)]
    dcross = [_jvp(vxH, V, dV[1 + j]) for j in range(d)]  # d_j (v x H)
    if d == 2:
        curl = [dcross[1][0], -dcross[0][0]]
    else:
        curl = [dcross[1][2] - dcross[2][1],
                dcross[2][0] - dcross[0][2],
                dcross[0][1] - dcross[1][0]]
    cons += [dh - c for dh, c in zip(dH_dt, curl)]

    # entropy transport (d/dt + v.grad) S
    _, _, _, _, _, _, Gamma, v, _, _, _, _, _ = _rel_funcs_of_V(V, model)
    dS = dV[0][2 * d + 1]
    for j in range(d):
        dS = dS + v[j] * dV[1 + j][2 * d + 1]
    cons.append(dS)

    # symmetric-form residual B_0 dV/dt + B_i dV/dx_i at the same point
    p = V[0]
    S = V[2 * d + 1]
    Gam = np.sqrt(1.0 + eps ** 2 * sum(np.asarray(w) ** 2 for w in wvec))
    vv = [np.asarray(w) / Gam for w in wvec]
    Hh = [V[1 + d + i] for i in range(d)]
    vH = sum(a * b for a, b in zip(vv, Hh))
    H2 = sum(np.asarray(x) ** 2 for x in Hh)
    q = p + 0.5 * (H2 / Gam ** 2 + eps ** 2 * vH ** 2)
    _, (b0, bis), _, _ = rel_entries(q, vv, Hh, S, model)
    sym = mat_vec(b0, list(dV[0]))
    for j in range(d):
        term = mat_vec(bis[j], list(dV[1 + j]))
        sym = [s + t for s, t in zip(sym, term)]
    return np.asarray(cons, dtype=float), np.asarray(sym, dtype=float)
