"""A chain of alternating transforms driven by a pipeline config.

Every step writes its fields to disk; the run ends with one residual
report per carried solution and a manifest of file hashes.

Run with ``python3 demos/04_alternating_chain.py [depth]``.
"""
import json
import sys
import tempfile

from moutard.examples import make_example
from moutard.pipeline import PipelineConfig, run_pipeline

depth = int(sys.argv[1]) if len(sys.argv) > 1 else 3
config = make_example("alternating", {"depth": depth, "n": 129})
print(json.dumps(config["steps"], indent=1))

root = tempfile.mkdtemp(prefix="moutard-demo-")
result = run_pipeline(PipelineConfig.from_dict(config, root=root))
for rep in result.reports:
    print(rep.line())
print("status", result.status, "outputs in", result.output)
