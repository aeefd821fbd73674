"""Smoke test for the `codazzi` extension module.

Build and install first:  maturin build --release -m crates/python/Cargo.toml
then pip install the wheel, or run `maturin develop` inside a virtualenv.
"""

import json
import sys

import codazzi


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    print("scenarios:", ", ".join(codazzi.scenarios()))

    for name in codazzi.catalog():
        s = codazzi.Soliton(name)
        p = s.grid_points([3, 3, 3])[13]
        res = s.soliton_residual(p)
        print(f"{name:>10}: kind={s.kind:<9} R={s.scalar_curvature(p):+.6f} soliton residual={res:.1e}")
        assert res < 1e-6

    s3 = codazzi.Soliton("s3")
    assert close(s3.scalar_curvature([0.2, 0.1, -0.3]), 6.0, 1e-10)

    cig = codazzi.Soliton("cigar-line")
    lem = cig.lemma([5, 5, 5])
    print("cigar lemma codazzi max:", f"{lem['codazzi']['max']:.2e}")
    assert lem["codazzi"]["max"] < 1e-4

    m = codazzi.Merton()
    q = [0.5, 0.2, 1.1]
    gam, tab = m.christoffel(q), m.closed_form_christoffel(q)
    worst = max(abs(gam[k][i][j] - tab[k][i][j]) for k in range(3) for i in range(3) for j in range(3))
    print(f"merton christoffel vs closed form: {worst:.2e}")
    assert worst < 1e-10
    assert m.codazzi_residual(q) < 1e-10

    fd = codazzi.Scheme(h=1e-2, exact_jets=False)
    rep = codazzi.run_scenario("cylinder", scheme=fd)
    print(rep, f"{rep.runtime_s:.2f}s")
    assert rep.passed
    doc = json.loads(rep.dumps("json"))
    assert doc["scenario"] == "cylinder" and len(doc["checks"]) == len(rep)

    try:
        codazzi.run_scenario(config='{"scenario": "merton", "gird": {}}')
    except codazzi.CodazziError as e:
        print("rejected bad config:", str(e).splitlines()[0])
    else:
        raise AssertionError("bad config accepted")

    print("smoke test OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
