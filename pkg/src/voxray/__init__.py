"""voxray: CPU direct volume rendering with transfer functions and evaluation."""

from .camera import Camera, Ray, preset_camera
from .errors import ConfigError, FormatError, VoxrayError
from .evaluation import (
    dice,
    dice_curve,
    extract_slice,
    threshold_mask,
)
from .grid import CellCoords, VolumeGrid
from .ingest import (
    VolumeMeta,
    load_raw_volume,
    load_slice_stack,
    load_volume_file,
    save_volume_file,
    write_raw_volume,
)
from .phantom import (
    Box,
    PhantomSpec,
    Pyramid,
    Shell,
    Sphere,
    generate_phantom,
)
from .raycast import (
    CompositeState,
    FrameImage,
    SamplingConfig,
    clip_to_volume,
    composite_step,
    integrate_ray_front_to_back,
    integrate_ray_reference,
    render,
    render_with_stats,
)
from .shading import (
    ShadingConfig,
    ShadingInputs,
    cel_shade,
    phong_shade,
    reflect,
)
from .transfer import TransferFunction, grayscale_ramp, isolate_band

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Camera",
    "CellCoords",
    "CompositeState",
    "ConfigError",
    "FormatError",
    "FrameImage",
    "PhantomSpec",
    "Pyramid",
    "Ray",
    "SamplingConfig",
    "ShadingConfig",
    "ShadingInputs",
    "Shell",
    "Sphere",
    "TransferFunction",
    "VolumeGrid",
    "VolumeMeta",
    "VoxrayError",
    "cel_shade",
    "clip_to_volume",
    "composite_step",
    "dice",
    "dice_curve",
    "extract_slice",
    "generate_phantom",
    "grayscale_ramp",
    "integrate_ray_front_to_back",
    "integrate_ray_reference",
    "isolate_band",
    "load_raw_volume",
    "load_slice_stack",
    "load_volume_file",
    "phong_shade",
    "preset_camera",
    "reflect",
    "render",
    "render_with_stats",
    "save_volume_file",
    "threshold_mask",
    "write_raw_volume",
]
