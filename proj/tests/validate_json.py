"""Validate every *.json summary in a directory against the summary schema."""
import json
import pathlib
import sys

import jsonschema


def main(schema_path, out_dir):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    files = sorted(pathlib.Path(out_dir).glob("*.json"))
    if len(files) < 7:
        print(f"expected 7 summaries, found {len(files)}")
        return 1
    bad = 0
    for f in files:
        errors = list(validator.iter_errors(json.loads(f.read_text())))
        for e in errors:
            print(f"{f.name}: {e.message}")
        bad += bool(errors)
    # The schema must reject a truncated summary.
    if validator.is_valid({"kind": "hbt", "g2": 0.01}):
        print("schema accepted a truncated summary")
        bad += 1
    print(f"{len(files)} files, {bad} invalid")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
