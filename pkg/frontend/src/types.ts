/**
 * DTOs mirroring the service's JSON formats (meters, radians, pixels).
 */

export type Point = [number, number];

export interface PlanDoc {
  boundary: Point[];
  obstacles: Point[][];
}

export interface CameraDoc {
  position: Point;
  yaw: number;
  fov: number;
  height: number;
  pitch: number;
  focal: number;
  image_w: number;
  image_h: number;
}

export interface CurvatureDoc {
  kind: 'flat' | 'convex';
  radius?: number;
  facet_count?: number;
}

export interface MirrorDoc {
  id: number;
  segment: [Point, Point];
  facing: Point;
  z_bottom: number;
  z_top: number;
  curvature: CurvatureDoc;
}

export interface ZoneDoc {
  id: number;
  polygon: Point[];
  kind: 'target' | 'non_interest';
}

export interface SceneDoc {
  plan: PlanDoc;
  camera: CameraDoc;
  mirrors: MirrorDoc[];
  zones: ZoneDoc[];
}

export interface ZoneSummary {
  id: number;
  kind: 'target' | 'non_interest';
  cells: number;
  covered_cells: number;
  direct_cells: number;
  coverage_fraction: number;
  marker: Point;
  marker_covered: boolean;
}

export interface CoverageResponse {
  cell_size: number;
  origin: Point;
  nx: number;
  ny: number;
  mirror_ids: number[];
  free: string[];
  direct: string[];
  indirect: Record<string, string[]>;
  summary: {
    free_cells: number;
    covered_cells: number;
    uncovered_cells: number;
    zones: ZoneSummary[];
  };
}

export interface MirrorAlignment {
  mirror_id: number;
  target_cells_covered: number;
  leakage_cells: number;
  aligned: boolean;
}

export interface AlignmentResponse {
  mirrors: MirrorAlignment[];
  all_aligned: boolean;
}

export interface MaskPreviewResponse {
  width: number;
  height: number;
  quads: { mirror_id: number | null; corners: Point[] }[];
  mask_pgm_base64: string;
}

export interface MountDoc {
  segment: [Point, Point];
  allowed_yaw: [number, number];
}

export interface PlannerConfigDoc {
  max_mirrors?: number;
  iterations?: number;
  seed?: number;
  cell_size?: number;
}

export interface PlacementDoc {
  mirrors: MirrorDoc[];
  metrics: {
    score: number;
    coverage_fraction: number;
    leakage_fraction: number;
    direct_coverage_fraction: number;
    mirror_count: number;
    iterations: number;
    seed: number;
  };
}

export interface JobRecord {
  job_id: string;
  kind: 'optimize';
  status: 'pending' | 'running' | 'done' | 'failed';
  result: PlacementDoc | null;
  error?: string | null;
}
