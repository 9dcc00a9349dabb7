"""Counter-training protocol on synthetic glyphs, recorded step by step.

Run as a script to rewrite the checked-in trace::

    python tests/golden_trace.py
"""

import hashlib
import json
import os
import sys

from dins.concept import concept_to_dict
from dins.network import Network

sys.path.insert(0, os.path.dirname(__file__))
from shapes import SHAPES, render  # noqa: E402

TRACE = os.path.join(os.path.dirname(__file__), "data", "counter_training_trace.json")
FLIPPED_ELL = [((0, 5), (7, 5)), ((7, 5), (7, 0))]

PROTOCOL = [
    ("first exemplar", SHAPES["ell"], (6, 6), 3),
    ("same exemplar again", SHAPES["ell"], (6, 6), 3),
    ("shifted exemplar", SHAPES["ell"], (8, 7), 3),
    ("new style, same class", SHAPES["tri"], (6, 6), 3),
    ("known style, no response", FLIPPED_ELL, (14, 14), 3),
    ("first exemplar under another label", SHAPES["ell"], (6, 6), 5),
]


def map_digest(m) -> str:
    blob = json.dumps({str(a): [d.kind, concept_to_dict(d.concept)] for a, d in sorted(m.detectors.items())},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_protocol():
    net = Network()
    out = []
    for step, strokes, (dr, dc), z in PROTOCOL:
        acts = net.train_image(render(strokes, dr, dc), z, exposure=len(out))
        out.append({
            "step": step,
            "label": z,
            "actions": list(acts),
            "detectors": {str(k): {a: [d.kind, d.concept.k, d.g] for a, d in sorted(m.detectors.items())}
                          for k, m in net.maps.items() if m.detectors},
            "bindings": {str(k): list(v) for k, v in sorted(net.rep.bindings.items()) if v},
            "maps": {str(k): map_digest(m) for k, m in net.maps.items() if m.detectors},
        })
    return json.loads(json.dumps(out))


if __name__ == "__main__":
    with open(TRACE, "w") as fh:
        json.dump(run_protocol(), fh, indent=1, sort_keys=True)
        fh.write("\n")
