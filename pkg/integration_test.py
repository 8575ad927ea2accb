# integration_test.py

import logging
import math
import sys
from pathlib import Path

import numpy as np

from axisym import axisym_functionals, make_capsule_curve
from biharmonic_gluing import ConnectedSumParams, connected_sum_report
from constructions import build_gamma_t, predicted_gamma_energy
from functionals import functional_report
from mobius import willmore_invariance_check
from optimizer import FlowConfig, run_flow
from settings import load_config
from surface_mesh import build_icosphere, build_torus

log = logging.getLogger("IntegrationTest")


def run_system_check() -> bool:
    """
    End-to-end pass over the pipeline: config, discrete functionals,
    inversions, profiles, explicit constructions, gluing and the flow.
    Returns True when every step passes.
    """
    log.info("🚀 Starting System Integration Check...")
    passed = True

    # 1. Configuration
    config = load_config(Path(__file__).parent / 'config.ini')
    if not config.has_section('flow'):
        log.error("❌ Step 1 Failed: [flow] section missing.")
        return False
    log.info("✅ Step 1: Configuration loaded.")

    # 2. Round sphere
    try:
        report = functional_report(build_icosphere(4))
        if abs(report.W - 4.0 * math.pi) < 0.02 * 4.0 * math.pi and abs(report.T - 4.0 * math.sqrt(math.pi)) < 0.05:
            log.info(f"✅ Step 2: Sphere W = {report.W:.6f}, T = {report.T:.6f}")
        else:
            log.error(f"❌ Step 2 Failed: sphere gave W = {report.W}, T = {report.T}")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 2 Failed: {e}")
        passed = False

    # 3. Clifford torus
    try:
        report = functional_report(build_torus(math.sqrt(2.0), 1.0, 96, 96))
        if abs(report.W / (2.0 * math.pi ** 2) - 1.0) < 0.02:
            log.info(f"✅ Step 3: Clifford torus W = {report.W:.6f}")
        else:
            log.error(f"❌ Step 3 Failed: Clifford torus W = {report.W}")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 3 Failed: {e}")
        passed = False

    # 4. Inversion
    try:
        _, _, gap = willmore_invariance_check(build_icosphere(3), [3.0, 0.0, 0.0])
        if gap < 0.05:
            log.info(f"✅ Step 4: W gap under inversion {gap:.3g}")
        else:
            log.warning(f"⚠️ Step 4 Warning: W gap under inversion {gap:.3g}")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 4 Failed: {e}")
        passed = False

    # 5. Profile curves
    try:
        capsule = axisym_functionals(make_capsule_curve(1.0, 2.0))
        if abs(capsule.W / (5.0 * math.pi) - 1.0) < 1e-3:
            log.info(f"✅ Step 5: Capsule W = {capsule.W:.6f}")
        else:
            log.error(f"❌ Step 5 Failed: capsule W = {capsule.W}")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 5 Failed: {e}")
        passed = False

    # 6. Bridged spheres
    try:
        W = functional_report(build_gamma_t(2.0)).W
        predicted = predicted_gamma_energy(2.0)
        if abs(W / predicted - 1.0) < 0.05:
            log.info(f"✅ Step 6: Bridge W = {W:.6f} (predicted {predicted:.6f})")
        else:
            log.error(f"❌ Step 6 Failed: bridge W = {W}, predicted {predicted}")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 6 Failed: {e}")
        passed = False

    # 7. Gluing
    try:
        params = ConnectedSumParams.from_config(np.diag([1.5, -0.5]), np.diag([2.0, 0.0]), 1e-3, config)
        glued = connected_sum_report(params, 8.0 * math.pi, 4.0 * math.pi)
        if glued.energy_decreases and glued.delta_T > 0:
            log.info(f"✅ Step 7: Gluing changes W by {glued.delta_W:.3g}, T by {glued.delta_T:.3g}")
        else:
            log.error("❌ Step 7 Failed: gluing did not lower the energy.")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 7 Failed: {e}")
        passed = False

    # 8. Constrained flow
    try:
        sphere = build_icosphere(3)
        ellipsoid = sphere.with_vertices(sphere.vertices * np.array([1.0, 1.0, 1.3]))
        T0 = functional_report(ellipsoid).T
        _, trace = run_flow(ellipsoid, FlowConfig.from_config(config, target_R=T0 + 0.005, max_iters=5,
                                                              smoothing_interval=0))
        energies = trace.accepted_energies()
        if len(energies) and np.all(np.diff(energies) <= 1e-10):
            log.info(f"✅ Step 8: Flow ran {len(energies)} steps, W = {energies[-1]:.6f}")
        else:
            log.error("❌ Step 8 Failed: flow energy increased or no steps were taken.")
            passed = False
    except Exception as e:
        log.error(f"❌ Step 8 Failed: {e}")
        passed = False

    log.info("--- INTEGRATION CHECK COMPLETE ---")
    return passed


def test_system_check():
    assert run_system_check()


if __name__ == "__main__":
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stdout
    )
    run_system_check()
