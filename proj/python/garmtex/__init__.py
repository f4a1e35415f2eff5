# Copyright 2026 The garmtex Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS-IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Garment texture digitization: TPS transfer into a UV atlas.

Images are (H, W, 4) uint8 RGBA arrays and masks (H, W) uint8 arrays with
0 background, 128 occluder, 255 garment. Annotation sets are dicts in the
on-disk document format. Failures raise GarmtexError whose args are
(message, code, category).
"""

from garmtex._core import (
    GarmtexError,
    Mesh,
    Schema,
    TpsTransform,
    digitize,
    digitize_files,
    evaluate_dirs,
    export_textured,
    fit_tps,
    inpaint,
    load_mesh,
    load_pose,
    load_schema,
    nmse,
    parse_schema,
    pose_frames,
    psnr,
    read_png,
    skin,
    ssim,
    synth,
    validate_annotations,
    verify_manifest,
    write_png,
)

__all__ = [
    "GarmtexError",
    "Mesh",
    "Schema",
    "TpsTransform",
    "digitize",
    "digitize_files",
    "evaluate_dirs",
    "export_textured",
    "fit_tps",
    "inpaint",
    "load_mesh",
    "load_pose",
    "load_schema",
    "nmse",
    "parse_schema",
    "pose_frames",
    "psnr",
    "read_png",
    "skin",
    "ssim",
    "synth",
    "validate_annotations",
    "verify_manifest",
    "write_png",
]


def error_code(err):
    """Short code name of a GarmtexError, e.g. "singular fit"."""
    return err.args[1] if len(err.args) > 1 else None
