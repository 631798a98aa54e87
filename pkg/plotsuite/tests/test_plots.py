import re
import subprocess
import sys
import time

import matplotlib.image as mpimg
import numpy as np
import pytest

from plotsuite.cli import main
from plotsuite.plots import PlotSpec, fit_slope, read_rows, render


def _write_csv(path, xname, xs, cols):
    names = [xname] + list(cols)
    lines = [",".join(names)]
    for i, x in enumerate(xs):
        row = [f"{x:.10e}"] + [f"{cols[c][i]:.10e}" if cols[c][i] is not None
                               else "" for c in cols]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _synthetic(path, power=2.0, coeff=0.37, xname="h"):
    xs = [2.0 ** -k for k in range(3, 7)]
    _write_csv(path, xname, xs, {"l2_error": [coeff * x ** power for x in xs]})
    return path


def test_fit_slope_exact():
    x = np.array([0.1, 0.05, 0.025])
    assert abs(fit_slope(x, 0.8 * x ** 2) - 2.0) <= 1e-12
    assert abs(fit_slope(x, 3.0 * x ** 0.5) - 0.5) <= 1e-12


def test_A10_plot_script(tmp_path, capsys):
    t0 = time.perf_counter()

    # synthetic errors exactly proportional to h^2
    syn = _synthetic(tmp_path / "syn.csv")
    png = tmp_path / "syn.png"
    rc = main([str(syn), "--x", "h", "--y", "l2_error", "--slopes", "2",
               "--out", str(png)])
    assert rc == 0
    out = capsys.readouterr().out
    m = re.search(r"slope l2_error vs h: ([-+0-9.eE]+)", out)
    assert m, out
    assert abs(float(m.group(1)) - 2.00) <= 0.01
    img = mpimg.imread(png)
    assert img.ndim == 3 and img.size > 0

    # real sweep output, produced through the solver CLI only
    real = tmp_path / "real.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "nlgfem", "sweep", "--domain", "rect",
         "--n", "4,8,16", "--delta", "0.1", "--out", str(real)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    png2 = tmp_path / "real.png"
    rc = main([str(real), "--x", "h", "--y", "l2_error,h1_error",
               "--slopes", "1,2", "--out", str(png2)])
    assert rc == 0
    assert mpimg.imread(png2).size > 0
    capsys.readouterr()

    assert time.perf_counter() - t0 < 30


def test_missing_column(tmp_path, capsys):
    syn = _synthetic(tmp_path / "syn.csv")
    rc = main([str(syn), "--y", "h1_error", "--out",
               str(tmp_path / "x.png")])
    assert rc == 2
    assert "missing" in capsys.readouterr().err
    with pytest.raises(ValueError):
        render(PlotSpec(csv_paths=(str(syn),), y=("h1_error",)))


def test_too_few_rows(tmp_path, capsys):
    short = tmp_path / "short.csv"
    _write_csv(short, "h", [0.125], {"l2_error": [1e-3]})
    rc = main([str(short), "--out", str(tmp_path / "x.png")])
    assert rc == 2
    assert "2 CSV rows" in capsys.readouterr().err


def test_empty_entries_rejected(tmp_path):
    gappy = tmp_path / "gappy.csv"
    _write_csv(gappy, "h", [0.25, 0.125], {"l2_error": [1e-2, None]})
    with pytest.raises(ValueError):
        render(PlotSpec(csv_paths=(str(gappy),),
                        out=str(tmp_path / "x.png")))


def test_render_is_deterministic(tmp_path, capsys):
    syn = _synthetic(tmp_path / "syn.csv")
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render(PlotSpec(csv_paths=(str(syn),), slopes=(2.0,), out=str(a),
                    title="demo"))
    render(PlotSpec(csv_paths=(str(syn),), slopes=(2.0,), out=str(b),
                    title="demo"))
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_multiple_csvs_concatenate(tmp_path, capsys):
    one = tmp_path / "one.csv"
    two = tmp_path / "two.csv"
    _write_csv(one, "h", [0.25, 0.125], {"l2_error": [0.37 * 0.25 ** 2,
                                                      0.37 * 0.125 ** 2]})
    _write_csv(two, "h", [0.0625, 0.03125],
               {"l2_error": [0.37 * 0.0625 ** 2, 0.37 * 0.03125 ** 2]})
    rc = main([str(one), str(two), "--out", str(tmp_path / "both.png")])
    assert rc == 0
    m = re.search(r"slope l2_error vs h: ([-+0-9.eE]+)",
                  capsys.readouterr().out)
    assert abs(float(m.group(1)) - 2.0) <= 1e-6


def test_delta_axis_and_row_order(tmp_path, capsys):
    # rows arrive plateau-last and unsorted; the fit ignores order
    dl = tmp_path / "delta.csv"
    xs = [0.005, 0.04, 0.01, 0.02]
    _write_csv(dl, "delta", xs, {"l2_error": [0.55 * x for x in xs]})
    rc = main([str(dl), "--x", "delta", "--slopes", "1",
               "--out", str(tmp_path / "delta.png")])
    assert rc == 0
    m = re.search(r"slope l2_error vs delta: ([-+0-9.eE]+)",
                  capsys.readouterr().out)
    assert abs(float(m.group(1)) - 1.0) <= 1e-6


def test_read_rows(tmp_path):
    syn = _synthetic(tmp_path / "syn.csv")
    rows = read_rows([str(syn)])
    assert len(rows) == 4
    assert set(rows[0]) == {"h", "l2_error"}
