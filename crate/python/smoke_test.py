"""Smoke test for the celldim Python module.

Build and install first: maturin develop -m crates/py/Cargo.toml
"""

import celldim


def main():
    b = celldim.Bundle.preset("rural")
    b.samples = 4000
    print(b)

    r = celldim.dimension(b, mode="broadcast", seed=1)
    assert r["bw_unicast"] == 0.0
    assert abs(r["bw_required"] - (r["bw_national_sfn"] + r["bw_regional_sfn"])) < 1e-9
    assert abs(r["bw_saving"] - celldim.spectrum_saving(r["bw_required"])) < 1e-12
    print("broadcast rural: %.1f MHz" % r["bw_required"])

    # same text round-trips
    again = celldim.Bundle.from_config(b.to_config())
    assert celldim.dimension(again, mode="broadcast", seed=1) == r

    per_class, agg = celldim.kaufman_roberts([(1, 1.0)], 1)
    assert abs(agg - 0.5) < 1e-12 and abs(per_class[0] - 0.5) < 1e-12

    bw = celldim.min_bandwidth([(1.0, 5.0), (4.0, 0.5)], target=1e-3, unit=0.1)
    assert bw > 4.0
    print("min bandwidth: %.1f MHz" % bw)

    sinr = celldim.sfn_sinr_db(b, seed=1)
    assert len(sinr) == 4000 and sinr == sorted(sinr)

    csv = celldim.sweep_csv(b, "isd_m", [4000.0, 6000.0], mode="broadcast", seed=1)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("series,axis,axis_value") and len(lines) == 3

    try:
        celldim.Bundle.from_config("[scenario]\nnot_a_key = 1\n")
    except ValueError as e:
        print("rejected bad config:", e)
    else:
        raise AssertionError("unknown key accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
