"""Generates a full report bundle and validates report.json against the schema."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    fixture, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([fixture, tmp], check=True)
        report = json.loads((Path(tmp) / "report.json").read_text())
    sections = ["pca", "patch_pca", "ica", "heatmaps", "comparisons", "ablation", "averages", "metadata"]
    missing = [s for s in sections if s not in report]
    if missing:
        print("missing sections:", missing)
        return 1
    errors = list(validator.iter_errors(report))
    for e in errors:
        print(f"{list(e.absolute_path)}: {e.message}")
    bad = dict(report)
    bad["ablation"] = dict(bad["ablation"], baseline=1.5)
    if validator.is_valid(bad):
        print("schema accepted an out-of-range accuracy")
        return 1
    if validator.is_valid({"format": "dsviz-report", "version": 1, "seed": 0}):
        print("schema accepted a report without sections")
        return 1
    print("report.json valid" if not errors else f"{len(errors)} schema error(s)")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
