"""Regenerates tests/data/llm_prompt_golden.json.

The judge prompt is maintained as a Python snippet (prompt_reference.py next to
this file); evaluating it with Python's own string-literal rules gives bytes
that are independent of the C++ literals under test.
"""
import json
import pathlib

here = pathlib.Path(__file__).parent
ns = {"text_gt": "GT", "text_pred": "PRED"}
exec((here / "prompt_reference.py").read_text(), ns)
messages = ns["build_messages"]("GT", "PRED")
golden = {
    "reference": "GT",
    "prediction": "PRED",
    "system": messages[0]["content"],
    "user": messages[1]["content"],
}
out = here.parent / "data" / "llm_prompt_golden.json"
out.write_text(json.dumps(golden, indent=2, ensure_ascii=False) + "\n")
