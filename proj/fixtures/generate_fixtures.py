#!/usr/bin/env python3
"""Generate the FCIDUMP fixtures used by the test and acceptance suites.

Restricted Hartree-Fock in an STO-3G basis, integrals evaluated with the
McMurchie-Davidson scheme (s and p shells only). The FCIDUMP files hold
chemist-notation (ij|kl) integrals over canonical RHF molecular orbitals.

Run from the repository root:  python3 fixtures/generate_fixtures.py
"""

import math
import sys

import numpy as np
from scipy.special import hyp1f1

ANGSTROM_TO_BOHR = 1.0 / 0.52917721092

# STO-3G contraction data (exponent, coefficient) with normalized primitives.
STO3G = {
    "H": [("s", [(3.42525091, 0.15432897),
                 (0.62391373, 0.53532814),
                 (0.16885540, 0.44463454)])],
    "N": [("s", [(99.1061690, 0.15432897),
                 (18.0523120, 0.53532814),
                 (4.88566020, 0.44463454)]),
          ("s", [(3.78045590, -0.09996723),
                 (0.87849660, 0.39951283),
                 (0.28571440, 0.70011547)]),
          ("p", [(3.78045590, 0.15591627),
                 (0.87849660, 0.60768372),
                 (0.28571440, 0.39195739)])],
}

CHARGES = {"H": 1.0, "N": 7.0}


class Primitive:
    def __init__(self, exp, coef, lmn, center):
        self.exp = exp
        self.coef = coef
        self.lmn = lmn
        self.center = np.asarray(center, dtype=float)


def primitive_norm(exp, lmn):
    l, m, n = lmn
    pref = (2.0 * exp / math.pi) ** 0.75
    num = (4.0 * exp) ** ((l + m + n) / 2.0)
    den = math.sqrt(
        math.factorial(2 * l) // math.factorial(l) // 2**l
        * math.factorial(2 * m) // math.factorial(m) // 2**m
        * math.factorial(2 * n) // math.factorial(n) // 2**n
    )
    # double factorial form: norm^2 = (2a/pi)^{3/2} (4a)^{L} / [(2l-1)!!(2m-1)!!(2n-1)!!]
    def dfact(k):
        r = 1
        while k > 1:
            r *= k
            k -= 2
        return r
    den = math.sqrt(dfact(2 * l - 1) * dfact(2 * m - 1) * dfact(2 * n - 1))
    return pref * num / den


def build_basis(atoms):
    """Return a list of contracted AOs; each AO is a list of Primitives."""
    aos = []
    for sym, center in atoms:
        for kind, prims in STO3G[sym]:
            if kind == "s":
                lmns = [(0, 0, 0)]
            else:
                lmns = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            for lmn in lmns:
                plist = [Primitive(e, c * primitive_norm(e, lmn), lmn, center)
                         for e, c in prims]
                aos.append(plist)
    # renormalize each contraction
    for ao in aos:
        s = 0.0
        for pa in ao:
            for pb in ao:
                s += pa.coef * pb.coef * overlap_prim(pa, pb)
        scale = 1.0 / math.sqrt(s)
        for pa in ao:
            pa.coef *= scale
    return aos


def hermite_E(i, j, t, Qx, a, b):
    """Hermite expansion coefficient E_t^{ij} for one Cartesian direction."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * Qx * Qx)
    if j == 0:
        return (hermite_E(i - 1, j, t - 1, Qx, a, b) / (2 * p)
                - q * Qx / a * hermite_E(i - 1, j, t, Qx, a, b)
                + (t + 1) * hermite_E(i - 1, j, t + 1, Qx, a, b))
    return (hermite_E(i, j - 1, t - 1, Qx, a, b) / (2 * p)
            + q * Qx / b * hermite_E(i, j - 1, t, Qx, a, b)
            + (t + 1) * hermite_E(i, j - 1, t + 1, Qx, a, b))


def overlap_prim(pa, pb):
    a, b = pa.exp, pb.exp
    AB = pa.center - pb.center
    s = 1.0
    for d in range(3):
        s *= hermite_E(pa.lmn[d], pb.lmn[d], 0, AB[d], a, b)
    return s * (math.pi / (a + b)) ** 1.5


def kinetic_prim(pa, pb):
    a, b = pa.exp, pb.exp
    AB = pa.center - pb.center

    def s1d(i, j, d):
        return hermite_E(i, j, 0, AB[d], a, b)

    def t1d(i, j, d):
        t = -2.0 * b * b * s1d(i, j + 2, d)
        t += b * (2 * j + 1) * s1d(i, j, d)
        if j >= 2:
            t -= 0.5 * j * (j - 1) * s1d(i, j - 2, d)
        return t

    l1, m1, n1 = pa.lmn
    l2, m2, n2 = pb.lmn
    out = (t1d(l1, l2, 0) * s1d(m1, m2, 1) * s1d(n1, n2, 2)
           + s1d(l1, l2, 0) * t1d(m1, m2, 1) * s1d(n1, n2, 2)
           + s1d(l1, l2, 0) * s1d(m1, m2, 1) * t1d(n1, n2, 2))
    return out * (math.pi / (a + b)) ** 1.5


def boys(n, x):
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def hermite_R(t, u, v, n, p, PC):
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        x = p * float(PC @ PC)
        return (-2.0 * p) ** n * boys(n, x)
    if t > 0:
        val = (t - 1) * hermite_R(t - 2, u, v, n + 1, p, PC) if t > 1 else 0.0
        return val + PC[0] * hermite_R(t - 1, u, v, n + 1, p, PC)
    if u > 0:
        val = (u - 1) * hermite_R(t, u - 2, v, n + 1, p, PC) if u > 1 else 0.0
        return val + PC[1] * hermite_R(t, u - 1, v, n + 1, p, PC)
    val = (v - 1) * hermite_R(t, u, v - 2, n + 1, p, PC) if v > 1 else 0.0
    return val + PC[2] * hermite_R(t, u, v - 1, n + 1, p, PC)


def nuclear_prim(pa, pb, atoms):
    a, b = pa.exp, pb.exp
    p = a + b
    P = (a * pa.center + b * pb.center) / p
    AB = pa.center - pb.center
    l1, m1, n1 = pa.lmn
    l2, m2, n2 = pb.lmn
    E = [[hermite_E(pa.lmn[d], pb.lmn[d], t, AB[d], a, b)
          for t in range(pa.lmn[d] + pb.lmn[d] + 1)] for d in range(3)]
    out = 0.0
    for sym, C in atoms:
        PC = P - np.asarray(C)
        acc = 0.0
        for t in range(l1 + l2 + 1):
            for u in range(m1 + m2 + 1):
                for v in range(n1 + n2 + 1):
                    acc += E[0][t] * E[1][u] * E[2][v] * hermite_R(t, u, v, 0, p, PC)
        out -= CHARGES[sym] * acc
    return out * 2.0 * math.pi / p


def eri_prim(pa, pb, pc, pd):
    a, b, c, d = pa.exp, pb.exp, pc.exp, pd.exp
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * pa.center + b * pb.center) / p
    Q = (c * pc.center + d * pd.center) / q
    AB = pa.center - pb.center
    CD = pc.center - pd.center
    E1 = [[hermite_E(pa.lmn[dd], pb.lmn[dd], t, AB[dd], a, b)
           for t in range(pa.lmn[dd] + pb.lmn[dd] + 1)] for dd in range(3)]
    E2 = [[hermite_E(pc.lmn[dd], pd.lmn[dd], t, CD[dd], c, d)
           for t in range(pc.lmn[dd] + pd.lmn[dd] + 1)] for dd in range(3)]
    PQ = P - Q
    out = 0.0
    for t in range(len(E1[0])):
        for u in range(len(E1[1])):
            for v in range(len(E1[2])):
                e1 = E1[0][t] * E1[1][u] * E1[2][v]
                if e1 == 0.0:
                    continue
                for tt in range(len(E2[0])):
                    for uu in range(len(E2[1])):
                        for vv in range(len(E2[2])):
                            e2 = E2[0][tt] * E2[1][uu] * E2[2][vv]
                            if e2 == 0.0:
                                continue
                            out += (e1 * e2 * (-1.0) ** (tt + uu + vv)
                                    * hermite_R(t + tt, u + uu, v + vv, 0, alpha, PQ))
    out *= 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))
    return out


def contracted(fn, *aos):
    out = 0.0
    for prims in _prim_products(aos):
        coef = 1.0
        for pr in prims:
            coef *= pr.coef
        out += coef * fn(*prims)
    return out


def _prim_products(aos):
    if len(aos) == 1:
        for p in aos[0]:
            yield (p,)
    else:
        for p in aos[0]:
            for rest in _prim_products(aos[1:]):
                yield (p,) + rest


def integrals(atoms):
    aos = build_basis(atoms)
    n = len(aos)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = contracted(overlap_prim, aos[i], aos[j])
            T[i, j] = T[j, i] = contracted(kinetic_prim, aos[i], aos[j])
            vij = contracted(lambda pa, pb: nuclear_prim(pa, pb, atoms), aos[i], aos[j])
            V[i, j] = V[j, i] = vij
    eri = np.zeros((n, n, n, n))
    done = np.zeros((n, n, n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if done[i, j, k, l]:
                        continue
                    val = contracted(eri_prim, aos[i], aos[j], aos[k], aos[l])
                    for (a, b) in ((i, j), (j, i)):
                        for (c, d) in ((k, l), (l, k)):
                            eri[a, b, c, d] = eri[c, d, a, b] = val
                            done[a, b, c, d] = done[c, d, a, b] = True
    e_nuc = 0.0
    for x in range(len(atoms)):
        for y in range(x):
            R = np.linalg.norm(np.asarray(atoms[x][1]) - np.asarray(atoms[y][1]))
            e_nuc += CHARGES[atoms[x][0]] * CHARGES[atoms[y][0]] / R
    return S, T + V, eri, e_nuc


def rhf(S, hcore, eri, n_elec, e_nuc, max_iter=200, tol=1e-12):
    n = S.shape[0]
    nocc = n_elec // 2
    sval, svec = np.linalg.eigh(S)
    X = svec @ np.diag(sval ** -0.5) @ svec.T
    D = np.zeros((n, n))
    E_old = 0.0
    diis_F, diis_R = [], []
    for it in range(max_iter):
        J = np.einsum("ijkl,kl->ij", eri, D)
        K = np.einsum("ikjl,kl->ij", eri, D)
        F_true = hcore + 2.0 * J - K
        # energy and convergence always from the true Fock of the current D
        E = np.sum(D * (hcore + F_true)) + e_nuc
        R = X.T @ (F_true @ D @ S - S @ D @ F_true) @ X
        if it > 1 and abs(E - E_old) < tol and np.max(np.abs(R)) < 1e-10:
            eps, C_prime = np.linalg.eigh(X.T @ F_true @ X)
            return E, eps, X @ C_prime
        E_old = E
        # DIIS extrapolation drives the next orbital update only
        diis_F.append(F_true.copy())
        diis_R.append(R.copy())
        if len(diis_F) > 8:
            diis_F.pop(0)
            diis_R.pop(0)
        F = F_true
        if len(diis_F) > 1:
            m = len(diis_F)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for x in range(m):
                for y in range(m):
                    B[x, y] = np.sum(diis_R[x] * diis_R[y])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * Fi for wi, Fi in zip(w, diis_F))
            except np.linalg.LinAlgError:
                pass
        eps, C_prime = np.linalg.eigh(X.T @ F @ X)
        C = X @ C_prime
        Cocc = C[:, :nocc]
        D = Cocc @ Cocc.T
    raise RuntimeError("SCF not converged")


def canonical_orbitals(S, hcore, eri, n_elec, e_nuc):
    E, eps, C = rhf(S, hcore, eri, n_elec, e_nuc)
    # fix degenerate blocks deterministically: diagonalize diag(1..n) in AO
    # index space within each block, then sign-fix each column
    n = len(eps)
    tie = np.diag(np.arange(1.0, n + 1.0))
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(eps[j] - eps[i]) < 1e-8:
            j += 1
        if j - i > 1:
            block = C[:, i:j]
            M = block.T @ tie @ block
            _, W = np.linalg.eigh(M)
            C[:, i:j] = block @ W
        i = j
    for k in range(n):
        idx = np.argmax(np.abs(C[:, k]))
        if C[idx, k] < 0:
            C[:, k] = -C[:, k]
    return E, eps, C


def write_fcidump(path, C, hcore, eri, n_elec, e_nuc, thresh=1e-12):
    n = C.shape[1]
    h_mo = C.T @ hcore @ C
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, C, C, C, C, optimize=True)
    lines = []
    lines.append(f"&FCI NORB={n:4d},NELEC={n_elec:3d},MS2=0,")
    lines.append("  ORBSYM=" + ",".join(["1"] * n) + ",")
    lines.append("  ISYM=1,")
    lines.append("&END")

    def emit(v, i, j, k, l):
        lines.append(f" {v: .16E} {i:4d} {j:4d} {k:4d} {l:4d}")

    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    v = eri_mo[i, j, k, l]
                    if abs(v) > thresh:
                        emit(v, i + 1, j + 1, k + 1, l + 1)
    for i in range(n):
        for j in range(i + 1):
            if abs(h_mo[i, j]) > thresh:
                emit(h_mo[i, j], i + 1, j + 1, 0, 0)
    emit(e_nuc, 0, 0, 0, 0)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def h_chain(n_atoms, spacing_angstrom=1.0):
    d = spacing_angstrom * ANGSTROM_TO_BOHR
    return [("H", (0.0, 0.0, k * d)) for k in range(n_atoms)]


def nh3_geometry(r_angstrom=1.0, hnh_degrees=107.0):
    r = r_angstrom * ANGSTROM_TO_BOHR
    gamma = math.radians(hnh_degrees)
    cos_theta = math.sqrt((2.0 * math.cos(gamma) + 1.0) / 3.0)
    sin_theta = math.sqrt(1.0 - cos_theta**2)
    atoms = [("N", (0.0, 0.0, 0.0))]
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0
        atoms.append(("H", (r * sin_theta * math.cos(phi),
                            r * sin_theta * math.sin(phi),
                            r * cos_theta)))
    return atoms


def run(tag, atoms, n_elec, path):
    S, hcore, eri, e_nuc = integrals(atoms)
    E, eps, C = canonical_orbitals(S, hcore, eri, n_elec, e_nuc)
    write_fcidump(path, C, hcore, eri, n_elec, e_nuc)
    print(f"{tag}: E_RHF = {E:.10f} Ha, e_nuc = {e_nuc:.10f}, "
          f"norb = {C.shape[1]}, nelec = {n_elec}")
    return E


def main():
    # validation: H2 at R = 0.7414 A, literature RHF/STO-3G = -1.11675 Ha
    atoms = h_chain(2, 0.7414)
    S, hcore, eri, e_nuc = integrals(atoms)
    E, _, _ = canonical_orbitals(S, hcore, eri, 2, e_nuc)
    print(f"validation H2: E_RHF = {E:.8f} (expect approx -1.11675)")
    if abs(E - (-1.11675)) > 5e-4:
        sys.exit("H2 validation failed")

    run("h3plus", h_chain(3), 2, "fixtures/h3plus.fcidump")
    run("h4", h_chain(4), 4, "fixtures/h4.fcidump")
    run("nh3", nh3_geometry(), 10, "fixtures/nh3.fcidump")


if __name__ == "__main__":
    main()
