import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).resolve().parents[1] / "src" / "pwrc" / "data" / "synthetic30"


@pytest.fixture
def bundled():
    return {
        "scores": DATA / "scores.csv",
        "preds": DATA / "predictions.csv",
        "polarity": DATA / "polarity.csv",
    }


@pytest.fixture
def tiny_csvs(tmp_path):
    """Three MOS rows and two metrics, one of them lower-is-better."""
    (tmp_path / "s.csv").write_text(
        "id,score,stddev,group,polarity\n"
        "a,20,2.0,g1,mos\n"
        "b,5,1.0,g1,mos\n"
        "c,10,3.0,g2,mos\n"
    )
    (tmp_path / "p.csv").write_text(
        "id,psnr,dist\n"
        "a,30.5,0.1\n"
        "b,20.0,0.9\n"
        "c,25.0,0.5\n"
    )
    (tmp_path / "pol.csv").write_text("metric,polarity\npsnr,higher\ndist,lower\n")
    return tmp_path / "s.csv", tmp_path / "p.csv", tmp_path / "pol.csv"


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert."""

    def record(label, ok, detail=""):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
