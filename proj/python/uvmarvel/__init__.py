# Copyright 2026 The UVMarvel Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the uvmarvel core.

Results come back as plain dicts and lists shaped like the CLI's JSON
output. Errors raise :class:`Error` with ``code`` and ``details`` attributes.
"""

import json
from typing import Callable, Iterable, Optional, Sequence, Tuple

from . import _core
from ._core import Design, Error

__all__ = [
    "Design",
    "Error",
    "trace",
    "patch",
    "parse_coverage",
    "serialize_coverage",
    "uncovered",
    "parse_ir",
    "validate_ir",
    "compute_srg",
    "verify_frozen_regions",
    "refine",
]
__version__ = "0.1.0"


def trace(design: Design, seeds: Iterable[str], expand_clock_reset: bool = False) -> dict:
    return json.loads(_core.trace(design, list(seeds), expand_clock_reset))


def patch(design: Design, slice_: dict) -> dict:
    return json.loads(_core.patch(design, json.dumps(slice_)))


def parse_coverage(text: str, source_name: str = "<report>") -> dict:
    return json.loads(_core.parse_coverage(text, source_name))


def serialize_coverage(text: str) -> str:
    """Normalized text form of a report given in any supported format."""
    return _core.serialize_coverage(text)


def uncovered(text: str, budget: int = 200, design: Optional[Design] = None) -> dict:
    return json.loads(_core.uncovered(text, budget, design))


def parse_ir(text: str) -> dict:
    return json.loads(_core.parse_ir(text))


def validate_ir(text: str, design: Optional[Design] = None) -> list:
    return json.loads(_core.validate_ir(text, design))


def compute_srg(results: Sequence[Tuple[str, bool, bool, bool]]) -> float:
    return _core.compute_srg(list(results))


def verify_frozen_regions(skeleton: str, output: str) -> list:
    return _core.verify_frozen_regions(skeleton, output)


def refine(
    design: Design,
    report_text: str,
    llms: Sequence[Tuple[str, Callable[[str], str]]],
    sim_script: dict,
    **config,
) -> dict:
    """Run the refinement loop with Python callables as the three models.

    ``sim_script`` uses the scripted simulator format (``rules`` and
    ``default``). Keyword arguments override loop settings such as
    ``points_per_iter`` or ``target_score``.
    """
    return json.loads(_core.refine(design, report_text, list(llms), json.dumps(sim_script), config))
