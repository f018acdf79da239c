"""Smoke test for the wpcn Python extension.

Build and run from the repository root:

    cargo build --release -p wpcn-python
    cp target/release/libwpcn_python.so python/wpcn.so
    python3 python/smoke_test.py
"""

import math

import wpcn


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    assert close(wpcn.lambert_w0(-1 / math.e), -1.0, 1e-12)
    assert wpcn.lambert_w0(0.0) == 0.0
    w = wpcn.lambert_w0(10.0)
    assert close(w * math.exp(w), 10.0, 1e-12)
    try:
        wpcn.lambert_w0(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError below -1/e")

    z = wpcn.solve_z(0.3, 2.0)
    u = 1 - 0.3 + z
    assert z > 0.3 and close(math.log(u) - z / u, 2.0, 1e-9)
    assert close(wpcn.jain_index([1.0, 1.0, 1.0]), 1.0, 1e-15)
    assert wpcn.jain_index([0.0, 0.0]) is None

    config = wpcn.NetworkConfig.reference(3)
    assert config.num_users == 3
    ch = wpcn.sample_epoch(1, config, 1)
    rbar = [1.0] * 3
    alloc = wpcn.allocate_epoch(ch, config, 0.0, rbar)
    assert alloc.transmits() and alloc.p0 == config.p_max
    assert close(alloc.tau0 + sum(alloc.tau), 1.0, 1e-12)
    silent = wpcn.allocate_epoch(ch, config, 2 * alloc.threshold, rbar)
    assert not silent.transmits()
    assert wpcn.kkt_residual(ch, config, 0.5 * alloc.threshold, rbar) < 1e-8

    small = wpcn.NetworkConfig(distances=[10.0], p_c=0.0)
    ch1 = wpcn.sample_epoch(5, small, 1)
    lam = 0.5 * wpcn.allocate_epoch(ch1, small, 0.0, [1.0]).threshold
    grid = wpcn.grid_search_epoch(ch1, small, lam, [1.0])
    closed = wpcn.allocate_epoch(ch1, small, lam, [1.0]).lagrangian([1.0], lam)
    assert close(grid["objective"], closed, 1e-4) and grid["e_on_boundary"]

    res = wpcn.run(config, 5000, 1, mode="pf")
    assert res.epochs == 5000 and len(res.avg_rates) == 3
    assert 0 < res.jain <= 1 and res.sum_rate > 0
    assert abs(res.avg_bs_power - config.p_avg) < 0.05 * config.p_avg
    assert len(res.lambda_trace) == 5000

    lam_star = wpcn.calibrate_lambda_offline(config, 2000, 1)
    assert lam_star > 0

    try:
        wpcn.NetworkConfig(distances=[10.0], p_avg=-1.0)
    except ValueError as e:
        assert "P_avg" in str(e)
    else:
        raise AssertionError("expected ValueError for negative P_avg")

    print(f"ok: sum_rate={res.sum_rate:.4f} jain={res.jain:.4f} spend={res.avg_bs_power:.4f}")


if __name__ == "__main__":
    main()
