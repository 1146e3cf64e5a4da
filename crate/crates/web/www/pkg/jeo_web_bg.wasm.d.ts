/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_get_settings_alpha: (a: number) => number;
export const __wbg_get_settings_beta: (a: number) => number;
export const __wbg_get_settings_edge: (a: number) => number;
export const __wbg_get_settings_rho: (a: number) => number;
export const __wbg_get_settings_shrink: (a: number) => number;
export const __wbg_get_settings_stages: (a: number) => number;
export const __wbg_get_settings_step: (a: number) => number;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const __wbg_scene_free: (a: number, b: number) => void;
export const __wbg_set_settings_alpha: (a: number, b: number) => void;
export const __wbg_set_settings_beta: (a: number, b: number) => void;
export const __wbg_set_settings_edge: (a: number, b: number) => void;
export const __wbg_set_settings_rho: (a: number, b: number) => void;
export const __wbg_set_settings_shrink: (a: number, b: number) => void;
export const __wbg_set_settings_stages: (a: number, b: number) => void;
export const __wbg_set_settings_step: (a: number, b: number) => void;
export const __wbg_settings_free: (a: number, b: number) => void;
export const reconstruction_image: (a: number) => [number, number];
export const reconstruction_map_count: (a: number) => number;
export const reconstruction_nonedge: (a: number, b: number) => [number, number];
export const reconstruction_psnr: (a: number) => number;
export const reconstruction_ssim: (a: number) => number;
export const scene_ground_truth: (a: number) => [number, number];
export const scene_initial_nonedge: (a: number) => [number, number, number, number];
export const scene_mask: (a: number) => [number, number];
export const scene_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const scene_reconstruct: (a: number, b: number) => [number, number, number];
export const scene_sampled_fraction: (a: number) => number;
export const scene_size: (a: number) => number;
export const scene_zero_filled: (a: number) => [number, number];
export const scene_zero_filled_psnr: (a: number) => [number, number, number];
export const settings_new: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
