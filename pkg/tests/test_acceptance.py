"""End-to-end acceptance checks.

Each test covers one numbered criterion, prints a single PASS/FAIL line
with the measured figure of merit and its tolerance, and enforces the
stated runtime budget.
"""

import cmath
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from conftest import (random_state, st_inversion_model, st_translation_model)
from nlcurrents.currents import (StateVector, amplitude_map_current,
                                 amplitude_map_summation,
                                 backward_assignment, constancy_deviation,
                                 continuity_residual,
                                 current_connection_residual, net_nlc_domain,
                                 nlc, nlc_field, nlc_operator,
                                 nonlocal_charge)
from nlcurrents.lattice import LatticeModel, LeadSpec
from nlcurrents.presets import (driven_cls_array, driven_cls_transforms,
                                kt_chain_array, kt_chain_transform,
                                local_pt_scatterer, pt_dimer_array,
                                pt_dimer_transform, ptr_pair_scatterer,
                                ptr_subunits)
from nlcurrents.scattering import (classify_resonance, embedded_nlc_field,
                                   embedded_state, find_ptr,
                                   pt_unitarity_residual, s_matrix,
                                   shift_smatrix, compose_smatrices,
                                   solve_scattering)
from nlcurrents.spectral import eigenmodes, time_evolve
from nlcurrents.symmetry import SymmetryTransform, map_site
from nlcurrents.floquet import (floquet_modes, period_averaged_nlc,
                                zero_sum_check)
from conftest import random_model, random_transform


def _report(num, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d}: {verdict} — {detail}")
    assert ok, f"criterion {num}: {detail}"


# -- 1: oracle equivalence of the three NLC forms ---------------------------

def test_criterion_01_three_forms_agree():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20170623)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 13))
        model = random_model(rng, n)  # non-Hermitian, non-equidirectional
        t = random_transform(rng, n)
        psi = StateVector(random_state(rng, n))
        field = nlc_field(model, psi, t)
        for site in range(1, n + 1):
            for d, arr in ((+1, field.q_plus), (-1, field.q_minus)):
                q_loop = nlc(model, psi, t, site, d)
                op = nlc_operator(model, t, site, d)
                q_op = complex(psi.amplitudes.conj() @ op @ psi.amplitudes)
                worst = max(worst, abs(q_loop - arr[site - 1]),
                            abs(q_loop - q_op))
    elapsed = time.perf_counter() - t0
    _report(1, worst < 1e-13 and elapsed < 5.0,
            f"50 random instances, max form disagreement {worst:.2e} "
            f"(tol 1e-13), {elapsed:.1f} s (budget 5 s)")


# -- 2: continuity law scales as O(dt^2) ------------------------------------

def test_criterion_02_continuity_second_order():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    model, t = st_inversion_model(rng, 8, scale=0.4)  # non-Hermitian onsite
    psi0 = StateVector(random_state(rng, 8))
    res = []
    for n_steps in (40, 80):
        traj = time_evolve(model, psi0, t_final=2.0, n_steps=n_steps)
        res.append(float(np.max(continuity_residual(model, traj, t))))
    ratio = res[0] / res[1]
    elapsed = time.perf_counter() - t0
    _report(2, 3.5 <= ratio <= 4.5 and elapsed < 10.0,
            f"central-difference residual ratio under dt halving "
            f"{ratio:.3f} (window [3.5, 4.5]), {elapsed:.1f} s "
            f"(budget 10 s)")


# -- 3: stationary invariance on complete and gapped local symmetry ---------

def test_criterion_03_stationary_invariance():
    t0 = time.perf_counter()
    # exact two-domain cover
    base = driven_cls_array(1.0).base
    sol = eigenmodes(base)
    worst = 0.0
    for t in driven_cls_transforms():
        for k in sol.real_energy_indices():
            field = nlc_field(base, sol.state(k), t)
            worst = max(worst, constancy_deviation(
                field.q_plus[t.d_lo - 1:t.d_hi - 1]))
    # gapped variant: local inversion domain [3, 10] with the central
    # site pair broken; constancy must survive on each side of the gap
    v = np.zeros(12)
    v[2:10] = [.4, .1, .3, .2, .2, .3, .1, .4]
    v[[0, 1, 10, 11]] = [.7, .25, .05, .55]
    h = np.ones(11)
    h[2:9] = [.5, .7, .9, .6, .9, .7, .5]
    h[[0, 1, 9, 10]] = [.45, .65, .35, .85]
    v = v * 0.1
    v[5] += 0.007  # break the (6, 7) pair
    h = h * 0.1
    gapped = LatticeModel(12, tuple(v.astype(complex)),
                          tuple(h.astype(complex)),
                          tuple(h.astype(complex)))
    tg = SymmetryTransform("inversion", 3, 10, center2=13)
    gsol = eigenmodes(gapped)
    worst_side = 0.0
    best_full = np.inf
    for k in gsol.real_energy_indices():
        field = nlc_field(gapped, gsol.state(k), tg)
        q = field.q_plus[2:9]  # links 3..9
        worst_side = max(worst_side, constancy_deviation(q[:3]),
                         constancy_deviation(q[4:]))
        best_full = min(best_full, constancy_deviation(q))
    elapsed = time.perf_counter() - t0
    _report(3, worst < 1e-9 and worst_side < 1e-9 and best_full > 1e-6
            and elapsed < 5.0,
            f"CLS constancy {worst:.2e}, gapped per-side {worst_side:.2e} "
            f"(tol 1e-9) while full-domain floor {best_full:.2e} > 1e-6, "
            f"{elapsed:.1f} s (budget 5 s)")


# -- 4: gain-loss inversion-symmetric array sweep ---------------------------

def test_criterion_04_inversion_sweep():
    t0 = time.perf_counter()
    t = pt_dimer_transform()
    gammas = np.linspace(0.0, 0.25, 400)
    n_real_all = 0
    worst_real_Q = 0.0
    worst_pair = 0.0
    worst_sum = 0.0
    saw_broken = False
    for g in gammas:
        model = pt_dimer_array(float(g))
        sol = eigenmodes(model)
        Q = np.empty(5, dtype=np.complex128)
        for k in range(5):
            field = nlc_field(model, sol.state(k), t)
            Q[k] = np.sum(field.q_plus[:5])
        im = np.abs(sol.energies.imag)
        if np.all(im < 1e-10):
            n_real_all += 1
            worst_real_Q = max(worst_real_Q, float(np.max(np.abs(Q))))
        else:
            saw_broken = True
            worst_sum = max(worst_sum, abs(np.sum(Q)))
            used = set()
            for k in range(5):
                if im[k] < 1e-10 or k in used:
                    continue
                partner = min((j for j in range(5)
                               if j != k and j not in used),
                              key=lambda j: abs(sol.energies[j]
                                                - np.conj(sol.energies[k])))
                used |= {k, partner}
                worst_pair = max(worst_pair, abs(Q[k] + Q[partner]))
    elapsed = time.perf_counter() - t0
    ok = (n_real_all > 0 and saw_broken and worst_real_Q < 1e-10
          and worst_pair < 1e-10 and worst_sum < 1e-10 and elapsed < 30.0)
    _report(4, ok,
            f"real window at {n_real_all}/400 grid points, max |Q| inside "
            f"{worst_real_Q:.2e}, conjugate-pair cancellation "
            f"{worst_pair:.2e}, total sum {worst_sum:.2e} (tol 1e-10), "
            f"{elapsed:.1f} s (budget 30 s)")


# -- 5: translation-symmetric array sweep with backward assignment ----------

def test_criterion_05_translation_sweep():
    t0 = time.perf_counter()
    t = kt_chain_transform()
    worst_re = 0.0
    worst_const = 0.0
    worst_broken_re = 0.0
    n_real_all = 0
    saw_broken = False
    for g in np.linspace(0.0, 0.3, 101):
        model = kt_chain_array(float(g))
        sol = eigenmodes(model)
        im = np.abs(sol.energies.imag)
        Q = np.empty(5, dtype=np.complex128)
        for k in range(5):
            field = nlc_field(model, sol.state(k), t)
            Q[k] = net_nlc_domain(field, (t.d_lo, t.d_hi))
        if np.all(im < 1e-10):
            n_real_all += 1
            for k in range(5):
                ext = backward_assignment(model, sol.state(k), t)
                assert not np.any(np.isnan(ext.real))
                worst_re = max(worst_re, float(np.max(np.abs(ext.real))))
                worst_const = max(worst_const, constancy_deviation(ext))
        else:
            saw_broken = True
            # the net domain sum keeps a fixed complex phase: it is purely
            # imaginary in the undivided-bilinear convention, i.e. the
            # i-rotated component vanishes
            worst_broken_re = max(worst_broken_re, abs(np.sum(Q).imag))
    elapsed = time.perf_counter() - t0
    ok = (n_real_all > 0 and saw_broken and worst_re < 1e-10
          and worst_const < 1e-9 and worst_broken_re < 1e-10
          and elapsed < 30.0)
    _report(5, ok,
            f"real window: max |Re q| {worst_re:.2e} (tol 1e-10), 5-site "
            f"extended constancy {worst_const:.2e} (tol 1e-9); broken "
            f"phase: off-axis part of sum Q {worst_broken_re:.2e} "
            f"(tol 1e-10), {elapsed:.1f} s (budget 30 s)")


# -- 6: amplitude mapping relations and the current connection --------------

def test_criterion_06_mapping_relations():
    rng = np.random.default_rng(66)
    # current mapping on scattering states (nonzero local current)
    worst_map = 0.0
    for _ in range(15):
        n = int(rng.integers(3, 8))
        vv = rng.standard_normal(n) * 0.1
        hh = 0.1 * (1.0 + 0.5 * rng.random(n - 1))
        model = LatticeModel(n, tuple(vv.astype(complex)),
                             tuple(hh.astype(complex)),
                             tuple(hh.astype(complex)),
                             boundary=LeadSpec(v=0.0, h=0.1))
        k = float(rng.uniform(0.3, math.pi - 0.3))
        state = solve_scattering(model, k, 1.0, 0.0)
        pad = 3
        big, psi = embedded_state(model, state, pad)
        t = random_transform(rng, big.n_sites)
        field = nlc_field(big, psi, t)
        for site in range(1, big.n_sites):
            j = field.j_plus[site - 1]
            if abs(j) < 1e-6:
                continue
            img = (map_site(t, site) if site in t.domain else site)
            expect = (psi.amplitudes[img - 1]
                      if 1 <= img <= big.n_sites else 0.0)
            got = amplitude_map_current(j, field.q_plus[site - 1],
                                        field.dual_plus[site - 1],
                                        psi.amplitudes[site - 1])
            worst_map = max(worst_map, abs(got - expect))
    # summation mapping on real-amplitude bound modes; the telescoping
    # path needs symmetric hoppings on the domain, so the hopping profile
    # is palindromic while the onsite energies stay arbitrary
    worst_sum = 0.0
    for _ in range(10):
        n = int(rng.integers(5, 10))
        vv = rng.standard_normal(n) * 0.3
        hh = 0.5 + rng.random(n - 1)
        hh = 0.5 * (hh + hh[::-1])
        model = LatticeModel(n, tuple(vv.astype(complex)),
                             tuple(hh.astype(complex)),
                             tuple(hh.astype(complex)))
        sol = eigenmodes(model)
        t = SymmetryTransform("inversion", 1, n, center2=n + 1)
        for k in (0, n // 2, n - 1):
            psi = sol.state(k)
            if np.min(np.abs(psi.amplitudes)) < 1e-6:
                continue
            anchor = 1 + int(np.argmax(np.abs(psi.amplitudes)))
            nbar0 = map_site(t, anchor)
            ratio = (psi.amplitudes[nbar0 - 1]
                     / np.conj(psi.amplitudes[anchor - 1]))
            for site in t.domain:
                got = amplitude_map_summation(model, psi, t, site,
                                              anchor, ratio)
                expect = psi.amplitudes[map_site(t, site) - 1]
                worst_sum = max(worst_sum, abs(got - expect))
    # current connection on hopping-symmetric instances
    worst_conn = 0.0
    for trial in range(20):
        if trial % 2 == 0:
            model, t = st_inversion_model(rng, int(rng.integers(4, 10)))
        else:
            n = int(rng.integers(7, 12))
            model, t = st_translation_model(rng, n, int(rng.integers(1, 4)))
        psi = StateVector(random_state(rng, model.n_sites))
        field = nlc_field(model, psi, t)
        for site in range(1, model.n_sites + 1):
            for d in (+1, -1):
                worst_conn = max(worst_conn,
                                 current_connection_residual(field, site, d))
    ok = worst_map < 1e-9 and worst_sum < 1e-10 and worst_conn < 1e-12
    _report(6, ok,
            f"current mapping {worst_map:.2e} (tol 1e-9), summation "
            f"mapping {worst_sum:.2e} (tol 1e-10), connection residual "
            f"{worst_conn:.2e} (tol 1e-12)")


# -- 7: scattering core -----------------------------------------------------

def test_criterion_07_scattering_core():
    rng = np.random.default_rng(77)
    worst_res = 0.0
    worst_unit = 0.0
    worst_recip = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 9))
        vv = rng.standard_normal(n) * 0.1
        hh = 0.1 * (1.0 + 0.5 * rng.random(n - 1))
        model = LatticeModel(n, tuple(vv.astype(complex)),
                             tuple(hh.astype(complex)),
                             tuple(hh.astype(complex)),
                             boundary=LeadSpec(v=0.0, h=0.1))
        k = float(rng.uniform(0.2, math.pi - 0.2))
        state = solve_scattering(model, k, 1.0, -0.4 + 0.2j)
        big, psi = embedded_state(model, state, pad=2)
        a = psi.amplitudes
        for m in range(2, big.n_sites):
            lhs = (big.v(m) * a[m - 1] + big.h(m, m - 1) * a[m - 2]
                   + big.h(m, m + 1) * a[m])
            worst_res = max(worst_res, abs(lhs - state.energy * a[m - 1]))
        s = s_matrix(model, k)
        worst_unit = max(worst_unit, s.unitarity_residual())
        worst_recip = max(worst_recip, abs(s.t - s.t_prime))
    ma, mb, offset = ptr_subunits(w=0.05, gap=3)
    full = ptr_pair_scatterer(w=0.05, gap=3)
    worst_comp = 0.0
    for k in np.linspace(0.2, 2.9, 40):
        comp = compose_smatrices(s_matrix(ma, float(k)),
                                 shift_smatrix(s_matrix(mb, float(k)),
                                               offset))
        ref = s_matrix(full, float(k))
        worst_comp = max(worst_comp,
                         float(np.max(np.abs(comp.matrix - ref.matrix))))
    ok = (worst_res <= 1e-12 and worst_unit <= 1e-12
          and worst_recip <= 1e-12 and worst_comp <= 1e-10)
    _report(7, ok,
            f"interior residual {worst_res:.2e} (tol 1e-12), unitarity "
            f"{worst_unit:.2e} (tol 1e-12), t=t' {worst_recip:.2e} "
            f"(tol 1e-12), composition {worst_comp:.2e} (tol 1e-10)")


# -- 8: perfect transmission resonances -------------------------------------

def test_criterion_08_ptr_suite():
    t0 = time.perf_counter()
    model = ptr_pair_scatterer(w=0.05, gap=3, identical=True)
    ma, mb, offset = ptr_subunits(w=0.05, gap=3, identical=True)
    alpha2 = model.n_sites + 1
    found = find_ptr(model, n_scan=2000, polish_center2=alpha2)
    assert found, "no perfect transmission resonances located"
    domains = [(1, 3, 4), (7, 9, 16)]
    pad = 2
    worst_refl = 0.0
    worst_qdiff = 0.0
    worst_phase = 0.0
    worst_density = 0.0
    n_sym = 0
    for res in found:
        res = classify_resonance(model, res, domains, pad=pad)
        k = res.k
        s1 = s_matrix(ma, k)
        s2 = shift_smatrix(s_matrix(mb, k), offset)
        worst_refl = max(worst_refl, abs(s1.r_prime - np.conj(s2.r)))
        state = solve_scattering(model, k, 1.0, 0.0)
        qmag = []
        for d_lo, d_hi, c2 in domains:
            t = SymmetryTransform("inversion", d_lo + pad, d_hi + pad,
                                  center2=c2 + 2 * pad)
            field = embedded_nlc_field(model, state, t, pad)
            links = field.q_plus[t.d_lo - 1:t.d_hi - 1]
            qmag.append(abs(complex(np.median(links.real),
                                    np.median(links.imag))))
        worst_qdiff = max(worst_qdiff, abs(qmag[0] - qmag[1]))
        if res.symmetric:
            n_sym += 1
            scale = 2.0 * 0.1 * math.sin(k)
            assert max(qmag) < 1e-8 * scale
            big, psi = embedded_state(model, state, pad)
            rho = np.abs(psi.amplitudes) ** 2
            for d_lo, d_hi, c2 in domains:
                for n in range(d_lo + pad, d_hi + pad + 1):
                    nbar = c2 + 2 * pad - n
                    worst_density = max(worst_density,
                                        abs(rho[n - 1] - rho[nbar - 1]))
        else:
            # transmission-phase quantization applies when the subunit
            # reflections are nonzero
            s_full = s_matrix(model, k)
            phase = cmath.phase(s_full.t
                                * cmath.exp(2j * k * ((16 - 4) // 2)))
            worst_phase = max(worst_phase,
                              min(abs(phase), math.pi - abs(phase)))
    elapsed = time.perf_counter() - t0
    ok = (worst_refl < 1e-8 and worst_qdiff < 1e-8 and n_sym > 0
          and worst_density < 1e-8 and worst_phase < 1e-6
          and elapsed < 60.0)
    _report(8, ok,
            f"{len(found)} resonances ({n_sym} symmetric): reflection "
            f"conjugacy {worst_refl:.2e} (tol 1e-8), |q_D1|-|q_D2| "
            f"{worst_qdiff:.2e} (tol 1e-8), density symmetry "
            f"{worst_density:.2e} (tol 1e-8), transmission phase "
            f"{worst_phase:.2e} (tol 1e-6), {elapsed:.1f} s (budget 60 s)")


# -- 9: two-domain gain/loss scatterer --------------------------------------

_DOMAINS9 = ((1, 5, 6), (6, 10, 16))


def _constancy_point(args):
    k, gb = args
    model = local_pt_scatterer(0.15, gb)
    state = solve_scattering(model, k, 1.0, 0.0)
    psi = StateVector(state.amplitudes)
    worst = 0.0
    for d_lo, d_hi, c2 in _DOMAINS9:
        t = SymmetryTransform("inversion", d_lo, d_hi, center2=c2,
                              with_time_reversal=True)
        field = nlc_field(model, psi, t)
        worst = max(worst, constancy_deviation(
            field.q_plus[d_lo - 1:d_hi - 1]))
    return worst


def test_criterion_09_generalized_unitarity_contours():
    t0 = time.perf_counter()
    ks = np.linspace(0.05, 3.05, 200)
    gbs = np.linspace(-0.2, 0.2, 200)
    worst_c1 = max(pt_unitarity_residual(s_matrix(
        local_pt_scatterer(0.15, 0.15), float(k))) for k in ks)
    worst_c2 = max(pt_unitarity_residual(s_matrix(
        local_pt_scatterer(0.15, 0.05), float(k))) for k in ks)
    # q+ constancy inside both domains over the full parameter grid
    points = [(float(k), float(g)) for g in gbs for k in ks]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=8, mp_context=ctx) as pool:
        worst_const = max(pool.map(_constancy_point, points,
                                   chunksize=500))
    # plain-inversion-symmetric case gamma_b = -gamma_a
    worst_dual = 0.0
    worst_mirror = 0.0
    model = local_pt_scatterer(0.15, -0.15)
    pad = 3
    tg = SymmetryTransform("inversion", 1 + pad, 10 + pad,
                           center2=11 + 2 * pad)
    for k in np.linspace(0.3, 2.8, 12):
        state = solve_scattering(model, float(k), 1.0, 0.0)
        field = embedded_nlc_field(model, state, tg, pad)
        dual = field.dual_plus[tg.d_lo - 1:tg.d_hi - 1]
        q = field.q_plus[tg.d_lo - 1:tg.d_hi - 1]
        worst_dual = max(worst_dual, constancy_deviation(dual))
        worst_mirror = max(worst_mirror,
                           float(np.max(np.abs(q + np.conj(q[::-1])))))
    elapsed = time.perf_counter() - t0
    ok = (worst_c1 < 1e-10 and worst_c2 < 1e-10 and worst_const < 1e-10
          and worst_dual < 1e-10 and worst_mirror < 1e-10
          and elapsed < 60.0)
    _report(9, ok,
            f"generalized unitarity {worst_c1:.2e} / {worst_c2:.2e} on the "
            f"two contours (tol 1e-10), grid constancy {worst_const:.2e} "
            f"(tol 1e-10, 200x200 points, 8 workers), opposite-sign case: "
            f"dual constancy {worst_dual:.2e}, mirror antisymmetry "
            f"{worst_mirror:.2e} (tol 1e-10), {elapsed:.1f} s (budget 60 s)")


# -- 10: driven arrays, period-averaged invariants --------------------------

def test_criterion_10_floquet_invariance():
    t0 = time.perf_counter()
    driven = driven_cls_array(1.0)
    # non-raising call certifies quasienergy stability M=6 -> M=8 to 1e-8
    sol = floquet_modes(driven, harmonics=6, convergence_tol=1e-8)
    worst_im = 0.0
    worst_const = 0.0
    worst_zero = 0.0
    for t in driven_cls_transforms():
        for k in range(sol.n_modes):
            qp, qm = period_averaged_nlc(driven, sol, k, t)
            links = qp[t.d_lo - 1:t.d_hi - 1]
            # the average is real in the undivided-bilinear convention
            # (i * q), i.e. its rotated imaginary part is Re(q)
            worst_im = max(worst_im, float(np.max(np.abs(links.real))))
            worst_const = max(worst_const, constancy_deviation(links))
            worst_zero = max(worst_zero,
                             zero_sum_check(qp, qm, (t.d_lo, t.d_hi)))
    # negative control: scaled onsite energies break the local symmetry
    broken = driven_cls_array(0.5)
    bsol = floquet_modes(broken, harmonics=6, check_convergence=False)
    broken_const = 0.0
    for t in driven_cls_transforms():
        for k in range(bsol.n_modes):
            qp, _ = period_averaged_nlc(broken, bsol, k, t)
            broken_const = max(broken_const, constancy_deviation(
                qp[t.d_lo - 1:t.d_hi - 1]))
    elapsed = time.perf_counter() - t0
    ok = (worst_im < 1e-6 and worst_const < 1e-6 and worst_zero < 1e-6
          and broken_const > 1e-6 and elapsed < 60.0)
    _report(10, ok,
            f"period-averaged q: off-axis part {worst_im:.2e}, constancy "
            f"{worst_const:.2e}, zero-sum {worst_zero:.2e} (tol 1e-6); "
            f"negative control constancy {broken_const:.2e} > 1e-6, "
            f"{elapsed:.1f} s (budget 60 s)")


# -- 11: quasipower conservation --------------------------------------------

def test_criterion_11_quasipower_conservation():
    t0 = time.perf_counter()
    model = pt_dimer_array(0.12)
    t = pt_dimer_transform()
    rng = np.random.default_rng(11)
    psi0 = StateVector(random_state(rng, 5))
    traj = time_evolve(model, psi0, t_final=50.0, n_steps=1000)
    sigma0 = nonlocal_charge(traj.states[0], t)
    drift = max(abs(nonlocal_charge(s, t) - sigma0) for s in traj.states)
    elapsed = time.perf_counter() - t0
    _report(11, drift < 1e-9 and elapsed < 5.0,
            f"quasipower drift over 1000 steps {drift:.2e} (tol 1e-9), "
            f"{elapsed:.1f} s (budget 5 s)")
