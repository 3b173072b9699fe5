#!/usr/bin/env python3
"""Regenerate the frozen oracle values in tests/data/stattest_goldens.json.

Run offline, once, against reference implementations (statsmodels / scipy).
The test suite never imports those libraries; it only reads the JSON this
script writes. Also sanity-checks the embedded unit-root critical-value
tables against the reference implementation and prints the comparison.
"""

import json
import sys
from pathlib import Path

import numpy as np
import scipy.stats
from statsmodels.stats.diagnostic import acorr_ljungbox, het_arch
from statsmodels.tsa.stattools import adfuller, kpss

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import golden_fixtures as gf  # noqa: E402

OUT = ROOT / "tests" / "data" / "stattest_goldens.json"


def main():
    goldens = {"fixtures": {}, "chi_square_cdf": []}

    for name, make in gf.FIXTURES.items():
        y = make()
        n = len(y)
        k_adf = gf.adf_lag(n)
        k_kpss = gf.kpss_lag(n)

        adf_stat = adfuller(y, maxlag=k_adf, regression="c", autolag=None)[0]
        kpss_stat = kpss(y, regression="c", nlags=k_kpss)[0]
        lb = acorr_ljungbox(y, lags=[gf.LJUNG_BOX_LAG], return_df=True)
        lb_stat = float(lb["lb_stat"].iloc[0])
        lm_stat = float(het_arch(y, nlags=gf.ARCH_LM_LAG)[0])

        goldens["fixtures"][name] = {
            "n": n,
            "adf_lag": k_adf,
            "adf_statistic": float(adf_stat),
            "kpss_lag": k_kpss,
            "kpss_statistic": float(kpss_stat),
            "ljung_box_lag": gf.LJUNG_BOX_LAG,
            "ljung_box_statistic": lb_stat,
            "arch_lm_lag": gf.ARCH_LM_LAG,
            "arch_lm_statistic": lm_stat,
        }
        print(f"{name:16s} adf={adf_stat:+.6f} kpss={kpss_stat:.6f} "
              f"lb={lb_stat:.6f} lm={lm_stat:.6f}")

    for x, k in [(0.5, 1), (2.0, 2), (3.84, 1), (7.5, 4), (18.31, 10),
                 (1e-3, 2), (55.0, 30), (4.0, 0.5)]:
        goldens["chi_square_cdf"].append(
            {"x": x, "k": k, "cdf": float(scipy.stats.chi2.cdf(x, k))}
        )

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(goldens, indent=2, sort_keys=True) + "\n")
    print(f"\nwrote {OUT}")

    check_tables()


def check_tables():
    """Compare embedded critical-value tables with the reference library."""
    from statsmodels.tsa.adfvalues import mackinnoncrit

    sys.path.insert(0, str(ROOT / "src"))
    from agforecast.stattests import _ADF_CRIT, _ADF_SIZES, _KPSS_CRIT, _KPSS_P

    print("\nADF table vs MacKinnon (1%/5%/10% columns):")
    worst = 0.0
    for i, size in enumerate(_ADF_SIZES):
        nobs = int(min(size, 10_000_000))
        ref = mackinnoncrit(N=1, regression="c", nobs=nobs)
        for p_idx, ref_idx in [(0, 0), (2, 1), (3, 2)]:
            diff = abs(_ADF_CRIT[i, p_idx] - ref[ref_idx])
            worst = max(worst, diff)
            print(f"  n={size:>8.0f} p={['1%','5%','10%'][ref_idx]:>3s} "
                  f"table={_ADF_CRIT[i, p_idx]:+.3f} ref={ref[ref_idx]:+.3f} "
                  f"diff={diff:.3f}")
    # Fuller (1976) vs MacKinnon (2010) differ by small response-surface
    # adjustments; anything beyond this bound would indicate a typo.
    assert worst < 0.06, f"ADF table mismatch too large: {worst}"

    # statsmodels embeds the same asymptotic KPSS critical values.
    ref_kpss = {0.10: 0.347, 0.05: 0.463, 0.025: 0.574, 0.01: 0.739}
    for stat, p in zip(_KPSS_CRIT, _KPSS_P):
        assert abs(ref_kpss[float(p)] - stat) < 1e-12
    print("KPSS table matches reference critical values exactly.")


if __name__ == "__main__":
    main()
