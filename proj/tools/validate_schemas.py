#!/usr/bin/env python3
"""Validate corpus payloads, job files and reports against docs/schemas."""

import glob
import json
import os
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

# payload fields and the schema each one follows
FIELDS = {
    "ring": "ring_spec", "module": "presented_module", "source": "presented_module",
    "target": "presented_module", "ses": "ses", "map": "module_map",
    "complex": "filtered_complex", "bk": "bk_module", "cw": "cw_complex",
}


def main(schema_dir, corpus_dir):
    registry, schemas = Registry(), {}
    for path in glob.glob(os.path.join(schema_dir, "*.schema.json")):
        with open(path) as f:
            s = json.load(f)
        Draft202012Validator.check_schema(s)
        schemas[s["$id"].removesuffix(".schema.json")] = s
        registry = registry.with_resource(s["$id"], Resource.from_contents(s))

    def errors(name, doc):
        return list(Draft202012Validator(schemas[name], registry=registry).iter_errors(doc))

    checked = failed = 0
    for path in sorted(glob.glob(os.path.join(corpus_dir, "*.json"))):
        base = os.path.basename(path)
        with open(path) as f:
            doc = json.load(f)
        if base.endswith(".job.json"):
            pairs = [("job_spec", doc)]
        elif base.endswith(".report.json"):
            pairs = [("report", doc)]
        else:
            pairs = [(FIELDS[k], v) for k, v in doc.items() if k in FIELDS]
        for name, part in pairs:
            checked += 1
            for e in errors(name, part):
                failed += 1
                print(f"{base}: {name} at {e.json_path}: {e.message}")
    print(f"{checked} documents, {failed} schema errors")
    return 1 if failed or not checked else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
