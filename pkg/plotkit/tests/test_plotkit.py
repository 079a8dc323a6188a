"""plotkit renders the smoke pipeline's artifacts; includes the acceptance check."""

import subprocess
import sys
from pathlib import Path

import pytest

from plotkit import FigureSpec, render
from plotkit.cli import main
from plotkit.schemas import SchemaMismatch, read_commented_csv

REPO_ROOT = Path(__file__).resolve().parents[2]
SMOKE_CONFIG = REPO_ROOT / "configs" / "smoke.yaml"


@pytest.fixture(scope="session")
def smoke_artifacts(tmp_path_factory):
    """Run the primary pipeline's smoke config through its public CLI."""
    out = tmp_path_factory.mktemp("smoke") / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "ecosweep.cli", "pipeline",
         "--config", str(SMOKE_CONFIG), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out


def test_acceptance_all_five_kinds_render(smoke_artifacts, tmp_path):
    """Acceptance: every figure kind renders; ICE strand counts match inputs."""
    out = tmp_path
    run = smoke_artifacts
    jobs = [
        ("regimes", [run / "phase1" / "dataset.csv"]),
        ("sobol-bars", [run / "phase2" / "sobol.json"]),
        ("sobol-heatmap", [run / "phase2" / "sobol.json"]),
        ("pdp-ice", [run / "phase2" / "pdp_ice_BG.csv"]),
        ("uncertainty", [run / "phase2" / "uncertainty_BG.csv"]),
    ]
    for kind, inputs in jobs:
        for ext in ("svg", "png"):
            spec = FigureSpec(kind=kind, inputs=tuple(str(p) for p in inputs),
                              output=str(out / f"{kind}.{ext}"))
            summary = render(spec)
            target = out / f"{kind}.{ext}"
            assert target.exists() and target.stat().st_size > 0

    # strand count equals the number of distinct ICE curves in the CSV
    curves_csv = run / "phase2" / "pdp_ice_BG.csv"
    header, rows = read_commented_csv(curves_csv)
    ids = {r[header.index("curve_id")] for r in rows} - {"pdp"}
    summary = render(FigureSpec(kind="pdp-ice",
                                inputs=(str(curves_csv),),
                                output=str(out / "strands.png")))
    assert summary["n_ice"] == len(ids)
    print(f"\nACCEPTANCE plotkit-render: PASS ({summary['n_ice']} strands)",
          file=sys.stderr)


def test_regimes_comparison_of_two_batches(smoke_artifacts, tmp_path):
    run = smoke_artifacts
    spec = FigureSpec(
        kind="regimes",
        inputs=(str(run / "phase1" / "dataset.csv"),
                str(run / "phase2" / "dataset.csv")),
        output=str(tmp_path / "compare.png"),
    )
    summary = render(spec)
    assert summary["n_inputs"] == 2
    assert (tmp_path / "compare.png").exists()


def test_sobol_bars_descending_total_order(smoke_artifacts, tmp_path):
    run = smoke_artifacts
    import json

    payload = json.loads((run / "phase2" / "sobol.json").read_text())
    summary = render(FigureSpec(
        kind="sobol-bars", inputs=(str(run / "phase2" / "sobol.json"),),
        output=str(tmp_path / "bars.svg")))
    st = payload["st"]
    order = summary["order"]
    assert order == sorted(order, key=lambda n: -st[n])


def test_pdp_only_input_warns_but_renders(smoke_artifacts, tmp_path):
    run = smoke_artifacts
    src = run / "phase2" / "pdp_ice_BG.csv"
    header, rows = read_commented_csv(src)
    cid = header.index("curve_id")
    pdp_only = tmp_path / "pdp_only.csv"
    lines = [",".join(header)] + [",".join(r) for r in rows if r[cid] == "pdp"]
    pdp_only.write_text("\n".join(lines) + "\n")
    with pytest.warns(UserWarning, match="PDP only"):
        summary = render(FigureSpec(kind="pdp-ice", inputs=(str(pdp_only),),
                                    output=str(tmp_path / "pdp_only.png")))
    assert summary["n_ice"] == 0


def test_schema_mismatch_cites_offending_column(smoke_artifacts, tmp_path):
    run = smoke_artifacts
    src = run / "phase2" / "uncertainty_BG.csv"
    header, rows = read_commented_csv(src)
    drop = header.index("sigma_total")
    broken = tmp_path / "broken.csv"
    lines = [",".join(header[:drop] + header[drop + 1:])]
    for r in rows:
        lines.append(",".join(r[:drop] + r[drop + 1:]))
    broken.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaMismatch, match="sigma_total"):
        render(FigureSpec(kind="uncertainty", inputs=(str(broken),),
                          output=str(tmp_path / "x.png")))


def test_cli_end_to_end_and_exit_codes(smoke_artifacts, tmp_path):
    run = smoke_artifacts
    out = tmp_path / "cli.png"
    assert main(["regimes", "--in", str(run / "phase1" / "dataset.csv"),
                 "--out", str(out)]) == 0
    assert out.exists()
    # bad extension -> usage error
    assert main(["regimes", "--in", str(run / "phase1" / "dataset.csv"),
                 "--out", str(tmp_path / "x.pdf")]) == 1
    # missing input -> data error
    assert main(["regimes", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "y.png")]) == 2
