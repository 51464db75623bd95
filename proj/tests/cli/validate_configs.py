"""Checks the shipped JSON Schema against the shipped and the malformed configs."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "tools/schema/config.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

bad = 0
for path in sorted((root / "tools/configs").glob("*.json")):
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    if errors:
        bad += 1
        print(f"{path.name}: {errors[0].message}")
for name in ["unknown_key", "old_schema", "wrong_type"]:
    if validator.is_valid(json.loads((root / f"tests/cli/{name}.json").read_text())):
        bad += 1
        print(f"{name}.json: accepted by the schema")
sys.exit(1 if bad else 0)
