"""Quick check that the compiled extension imports and agrees with known values.

Build first:  pip install --no-build-isolation ./crates/py
Run:          python python/smoke_test.py
"""

import stackgame_py as sg


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    linear = sg.DemandModel.linear(1.0, 1.0)
    out = sg.solve(linear, [1, 1, 1])
    assert [close(x, y) for x, y in zip(out.period_quantities, [0.5, 0.25, 0.125])] == [True] * 3
    assert close(out.total, 0.875)
    assert close(sg.infer_competitive_quantity(0.125, [1, 1, 1]), 1.0)
    assert sg.PeriodSequence([1, 2, 3]).s_measures() == [6, 11, 6]

    report = sg.check_independence(linear, [1], [[], [1], [2], [1, 1]])
    assert report["verdict"] == "SATISFIED"

    sine = sg.DemandModel.sine(1.0, 1.0, 0.023, k=5)
    report = sg.check_independence(sine, [1], [[], [1], [2]], tol=1e-3)
    assert report["verdict"] == "VIOLATED"
    print(f"sine prefix (1): max deviation {report['max_deviation']:.6f}")

    grid_out, converged, _ = sg.backward_induction_grid(linear, [1, 2])
    assert converged
    assert abs(grid_out.period_quantities[0] - 0.5) <= 2 / 2000 + 1e-9

    try:
        sg.solve(sg.DemandModel.sine(1.0, 1.0, 0.00025, k=100), [2, 2])
    except sg.RegularityError as e:
        print("regularity error as expected:", str(e)[:60], "...")
    else:
        raise AssertionError("expected a RegularityError")

    fig = sg.figure_data("fig2")
    print("fig2 columns:", ", ".join(fig["series"]["header"]))
    print(out.to_csv(), end="")
    print("smoke test passed")


if __name__ == "__main__":
    main()
