"""Fill ``calibration_rows`` of the packaged AlGaAs dispersion table.

The rows are evaluated with mpmath at 30 significant digits, independently
of ``pairforge.materials``, and act as the regression oracle for the index
model.  Run from the repository root:

    python tools/build_dispersion_table.py [--check]
"""
import argparse
import json
import sys
from pathlib import Path

import mpmath as mp

TABLE = Path(__file__).resolve().parents[1] / "src" / "pairforge" / "data" / "algaas_dispersion.json"
COMPOSITIONS = (0.0, 0.11, 0.25, 0.45, 0.80)
WAVELENGTHS = (785.0, 1570.0)
TEMPERATURES = (292.0, 298.15)

mp.mp.dps = 30
HC = mp.mpf("6.62607015e-34") * mp.mpf("299792458") / mp.mpf("1.602176634e-19") * mp.mpf("1e9")


def poly(c, x):
    return mp.fsum(mp.mpf(ci) * x**i for i, ci in enumerate(c))


def afromowitz(c, x, lam, T, t_ref):
    x, lam, T, t_ref = mp.mpf(x), mp.mpf(lam), mp.mpf(T), mp.mpf(t_ref)
    a, b = mp.mpf(c["varshni_alpha_eV_per_K"]), mp.mpf(c["varshni_beta_K"])
    dE = a * t_ref**2 / (t_ref + b) - a * T**2 / (T + b)
    eg = poly(c["Eg_eV"], x) + dE
    e0 = poly(c["E0_eV"], x) + mp.mpf(c.get("oscillator_thermal_shift", 1.0)) * dE
    ed = poly(c["Ed_eV"], x)
    E = HC / lam + 1j * mp.mpf(c.get("broadening_eV", 0.0))
    ef2 = 2 * e0**2 - eg**2
    eta = mp.pi * ed / (2 * e0**3 * (e0**2 - eg**2))
    eps = (1 + eta / (2 * mp.pi) * (ef2**2 - eg**4) + eta / (2 * mp.pi) * (ef2 - eg**2) * E**2
           + eta / mp.pi * E**4 * mp.log((ef2 - E**2) / (eg**2 - E**2)))
    return mp.re(mp.sqrt(eps))


def rows(doc):
    out = []
    for x in COMPOSITIONS:
        for lam in WAVELENGTHS:
            for T in TEMPERATURES:
                n = afromowitz(doc["coefficients"], x, lam, T, doc["reference_temperature_K"])
                out.append({"x": x, "wavelength_nm": lam, "temperature_K": T, "n": float(mp.nstr(n, 17))})
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="only compare, do not write")
    args = ap.parse_args(argv)
    doc = json.loads(TABLE.read_text())
    if doc["model"] != "afromowitz":
        sys.exit("this builder only knows the afromowitz model")
    new = rows(doc)
    if args.check:
        old = {(r["x"], r["wavelength_nm"], r["temperature_K"]): r["n"] for r in doc.get("calibration_rows", [])}
        worst = max(abs(old.get((r["x"], r["wavelength_nm"], r["temperature_K"]), float("inf")) - r["n"]) for r in new)
        print(f"max deviation from stored rows: {worst:.3e}")
        return 0 if worst < 1e-12 else 1
    doc["calibration_rows"] = new
    TABLE.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(new)} rows to {TABLE}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
