"""Report generation: markdown content, figures, determinism."""

import pytest

from conftest import tiny_maze_raw
from intero.config import from_dict
from intero.core import UsageError
from intero.harness import ablate
from intero.report import CALIBRATION_NOTE, report

FIGURES = ("v_trajectories.svg", "signals.svg", "reliability.svg",
           "ablation_returns.svg")


@pytest.fixture(scope="module")
def ablation_dir(tmp_path_factory):
    cfg = from_dict(tiny_maze_raw(episodes=1))
    return ablate(cfg, n_seeds=2, outdir=tmp_path_factory.mktemp("ab"), jobs=1)


def test_report_on_ablation_dir(ablation_dir):
    path = report(ablation_dir)
    assert path == ablation_dir / "report.md"
    for name in FIGURES:
        assert (ablation_dir / name).stat().st_size > 0
    text = path.read_text()
    assert text.startswith("# Run report")
    assert CALIBRATION_NOTE in text
    assert "## Operational criteria" in text
    assert "## Full agent vs reduced variants" in text
    # all seven reduced masks appear as table rows
    for label in ("HA-", "H-E", "H--", "-AE", "-A-", "--E", "---"):
        assert f"| {label} |" in text
    # the dominance verdict is stated either way, never omitted
    assert ("Dominance does not hold" in text
            or "exceeds every reduced variant" in text)


def test_report_on_single_run_dir(ablation_dir):
    run_dir = ablation_dir / "HAE_s0"
    path = report(run_dir)
    assert path == run_dir / "report.md"
    text = path.read_text()
    assert "Runs analyzed: 1" in text
    assert "## Full agent vs reduced variants" not in text  # no dominance.csv
    for name in FIGURES:
        assert (run_dir / name).exists()


def test_report_regenerates_byte_identical(ablation_dir):
    run_dir = ablation_dir / "HAE_s1"
    report(run_dir)
    first = {n: (run_dir / n).read_bytes() for n in ("report.md",) + FIGURES}
    report(run_dir)
    for name, blob in first.items():
        assert (run_dir / name).read_bytes() == blob, name


def test_report_usage_errors(tmp_path):
    with pytest.raises(UsageError, match="not a directory"):
        report(tmp_path / "missing")
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(UsageError, match="no completed runs"):
        report(empty)
