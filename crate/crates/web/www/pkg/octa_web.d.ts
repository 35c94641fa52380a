/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The scan as RGBA bytes.
     */
    image_rgba(): Uint8Array;
    constructor(seed: number, size: number, healthy: boolean);
    /**
     * Scan darkened, segmented vessel in green, filled holes in amber.
     */
    overlay_rgba(): Uint8Array;
    /**
     * Runs the pipeline with the given settings, keeping the mask for
     * [`Demo::overlay_rgba`].
     */
    segment(sigma: number, otsu_cap: number, binary_threshold: number): Readout;
    size(): number;
}

/**
 * Biomarkers of the current mask and its agreement with the phantom truth.
 */
export class Readout {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dice: number;
    filled_pixels: number;
    jaccard: number;
    mcnv_area_mm2: number;
    object_pixels: number;
    total_area_mm2: number;
    vessel_density: number;
}

/**
 * Votes for one point of the area plane.
 */
export class Verdict {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dl(): string;
    dt(): string;
    dt_rule(): string;
    ensemble(): string;
    svm(): string;
}

/**
 * Classifies areas (mm²) with the decision-tree table, the SVM and DL rules
 * on bins learned from the rule-region data, and their ensemble.
 */
export function classify_areas(mcnv_area_mm2: number, total_area_mm2: number): Verdict;

/**
 * RGBA map of the decision-tree table over `[0, max_area]²`, mCNV area on
 * the x axis and total area upwards. Points with total < mCNV are grey.
 */
export function rule_plane_rgba(width: number, height: number, max_area: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_get_readout_dice: (a: number) => number;
    readonly __wbg_get_readout_filled_pixels: (a: number) => number;
    readonly __wbg_get_readout_jaccard: (a: number) => number;
    readonly __wbg_get_readout_mcnv_area_mm2: (a: number) => number;
    readonly __wbg_get_readout_object_pixels: (a: number) => number;
    readonly __wbg_get_readout_total_area_mm2: (a: number) => number;
    readonly __wbg_get_readout_vessel_density: (a: number) => number;
    readonly __wbg_readout_free: (a: number, b: number) => void;
    readonly __wbg_set_readout_dice: (a: number, b: number) => void;
    readonly __wbg_set_readout_filled_pixels: (a: number, b: number) => void;
    readonly __wbg_set_readout_jaccard: (a: number, b: number) => void;
    readonly __wbg_set_readout_mcnv_area_mm2: (a: number, b: number) => void;
    readonly __wbg_set_readout_object_pixels: (a: number, b: number) => void;
    readonly __wbg_set_readout_total_area_mm2: (a: number, b: number) => void;
    readonly __wbg_set_readout_vessel_density: (a: number, b: number) => void;
    readonly __wbg_verdict_free: (a: number, b: number) => void;
    readonly classify_areas: (a: number, b: number) => number;
    readonly demo_image_rgba: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_overlay_rgba: (a: number) => [number, number];
    readonly demo_segment: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly demo_size: (a: number) => number;
    readonly rule_plane_rgba: (a: number, b: number, c: number) => [number, number];
    readonly verdict_dl: (a: number) => [number, number];
    readonly verdict_dt: (a: number) => [number, number];
    readonly verdict_dt_rule: (a: number) => [number, number];
    readonly verdict_ensemble: (a: number) => [number, number];
    readonly verdict_svm: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
