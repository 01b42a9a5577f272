"""Mirror-based coverage planning and mask-filtered detection evaluation."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .coverage import CoverageGrid, alignment_report, coverage_map, zone_summary
from .deteval import (BBox, Detection, EvalReport, GroundTruthBox,
                      average_precision, evaluate, filter_detections, iou,
                      match_detections)
from .geometry import (VisRegion, mirror_view_region, reflect_point,
                       visibility_polygon)
from .imgio import ImageBuffer, read_netpbm, write_netpbm
from .maskpipe import (AblationConfig, MaskRaster, QuadRegion, RegionSource,
                       blend, generate_mask, identify_regions,
                       project_mirror_to_image, run_pipeline)
from .planner import (MountSegment, Placement, PlannerConfig, objective,
                      optimize)
from .scene import (Camera, Curvature, FloorPlan, Mirror, Scene, Zone,
                    load_scene, save_scene, scene_from_json, scene_to_json)
from .synth import (SynthConfig, SynthDataset, benchmark_mounts,
                    benchmark_scene, oracle_detector, run_experiment,
                    synth_dataset, synth_scene)

__version__ = "0.1.0"
