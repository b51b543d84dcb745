"""The figure helper consumes the aggregate.json contract."""

import json
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[2]


def test_plot_results(tmp_path):
    aggregate = {
        "groups": [
            {
                "agent": "ucbvi",
                "eta": 0.3,
                "episodes": [1, 2, 3, 4],
                "mean_cum_regret": [1.0, 2.5, 3.0, 3.2],
                "seeds": [1, 2],
                "violations_per_seed": [3, 5],
                "mean_violations": 4.0,
                "final_cum_regret_per_seed": [3.1, 3.3],
            },
            {
                "agent": "unif_conserv_ucbvi",
                "eta": 0.3,
                "episodes": [1, 2, 3, 4],
                "mean_cum_regret": [1.0, 1.8, 2.2, 2.5],
                "seeds": [1, 2],
                "violations_per_seed": [0, 0],
                "mean_violations": 0.0,
                "final_cum_regret_per_seed": [2.4, 2.6],
            },
        ]
    }
    (tmp_path / "aggregate.json").write_text(json.dumps(aggregate))
    out = tmp_path / "fig.png"
    result = subprocess.run(
        [sys.executable, str(REPO / "tools" / "plot_results.py"), str(tmp_path), str(out)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    assert out.exists() and out.stat().st_size > 0
