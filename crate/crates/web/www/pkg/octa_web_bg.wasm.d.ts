/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_get_readout_dice: (a: number) => number;
export const __wbg_get_readout_filled_pixels: (a: number) => number;
export const __wbg_get_readout_jaccard: (a: number) => number;
export const __wbg_get_readout_mcnv_area_mm2: (a: number) => number;
export const __wbg_get_readout_object_pixels: (a: number) => number;
export const __wbg_get_readout_total_area_mm2: (a: number) => number;
export const __wbg_get_readout_vessel_density: (a: number) => number;
export const __wbg_readout_free: (a: number, b: number) => void;
export const __wbg_set_readout_dice: (a: number, b: number) => void;
export const __wbg_set_readout_filled_pixels: (a: number, b: number) => void;
export const __wbg_set_readout_jaccard: (a: number, b: number) => void;
export const __wbg_set_readout_mcnv_area_mm2: (a: number, b: number) => void;
export const __wbg_set_readout_object_pixels: (a: number, b: number) => void;
export const __wbg_set_readout_total_area_mm2: (a: number, b: number) => void;
export const __wbg_set_readout_vessel_density: (a: number, b: number) => void;
export const __wbg_verdict_free: (a: number, b: number) => void;
export const classify_areas: (a: number, b: number) => number;
export const demo_image_rgba: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number) => [number, number, number];
export const demo_overlay_rgba: (a: number) => [number, number];
export const demo_segment: (a: number, b: number, c: number, d: number) => [number, number, number];
export const demo_size: (a: number) => number;
export const rule_plane_rgba: (a: number, b: number, c: number) => [number, number];
export const verdict_dl: (a: number) => [number, number];
export const verdict_dt: (a: number) => [number, number];
export const verdict_dt_rule: (a: number) => [number, number];
export const verdict_ensemble: (a: number) => [number, number];
export const verdict_svm: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
