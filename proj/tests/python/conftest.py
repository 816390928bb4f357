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

import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = ROOT / "data"


def _cli_path():
    env = os.environ.get("UVMARVEL_CLI")
    if env:
        return env
    built = ROOT / "build" / "uvmarvel"
    if built.exists():
        return str(built)
    return shutil.which("uvmarvel")


@pytest.fixture(scope="session")
def cli():
    path = _cli_path()
    if not path:
        pytest.skip("uvmarvel CLI not built")
    return path


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def schema_dir():
    return ROOT / "schemas"


@pytest.fixture(scope="session")
def golden_dir():
    return ROOT / "tests" / "golden"
