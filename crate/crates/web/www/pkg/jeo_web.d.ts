/* tslint:disable */
/* eslint-disable */

export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `|x|` of the final stage, row-major.
     */
    image(): Float64Array;
    /**
     * Number of stored non-edge maps (initial map plus one per stage).
     */
    map_count(): number;
    /**
     * Minimum over the three detail channels of the map after `stage`
     * stages. Empty when edge optimization was off.
     */
    nonedge(stage: number): Float64Array;
    psnr(): number;
    ssim(): number;
}

/**
 * A phantom and its simulated acquisition.
 */
export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    ground_truth(): Float64Array;
    /**
     * Initial non-edge map of the zero-filled image (min over channels).
     */
    initial_nonedge(): Float64Array;
    /**
     * Sampling pattern, 1 where k-space was acquired.
     */
    mask(): Uint8Array;
    /**
     * `scheme` is `random`, `cartesian-random` or `cartesian-equidistant`.
     */
    constructor(size: number, coils: number, acceleration: number, scheme: string, noise_std: number, seed: number);
    reconstruct(settings: Settings): Reconstruction;
    sampled_fraction(): number;
    size(): number;
    zero_filled(): Float64Array;
    zero_filled_psnr(): number;
}

/**
 * Stage settings picked in the page.
 */
export class Settings {
    free(): void;
    [Symbol.dispose](): void;
    constructor();
    alpha: number;
    beta: number;
    edge: boolean;
    rho: number;
    /**
     * Soft threshold of the wavelet-shrinkage IDN; 0 disables it.
     */
    shrink: number;
    stages: number;
    step: number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_get_settings_alpha: (a: number) => number;
    readonly __wbg_get_settings_beta: (a: number) => number;
    readonly __wbg_get_settings_edge: (a: number) => number;
    readonly __wbg_get_settings_rho: (a: number) => number;
    readonly __wbg_get_settings_shrink: (a: number) => number;
    readonly __wbg_get_settings_stages: (a: number) => number;
    readonly __wbg_get_settings_step: (a: number) => number;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly __wbg_set_settings_alpha: (a: number, b: number) => void;
    readonly __wbg_set_settings_beta: (a: number, b: number) => void;
    readonly __wbg_set_settings_edge: (a: number, b: number) => void;
    readonly __wbg_set_settings_rho: (a: number, b: number) => void;
    readonly __wbg_set_settings_shrink: (a: number, b: number) => void;
    readonly __wbg_set_settings_stages: (a: number, b: number) => void;
    readonly __wbg_set_settings_step: (a: number, b: number) => void;
    readonly __wbg_settings_free: (a: number, b: number) => void;
    readonly reconstruction_image: (a: number) => [number, number];
    readonly reconstruction_map_count: (a: number) => number;
    readonly reconstruction_nonedge: (a: number, b: number) => [number, number];
    readonly reconstruction_psnr: (a: number) => number;
    readonly reconstruction_ssim: (a: number) => number;
    readonly scene_ground_truth: (a: number) => [number, number];
    readonly scene_initial_nonedge: (a: number) => [number, number, number, number];
    readonly scene_mask: (a: number) => [number, number];
    readonly scene_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly scene_reconstruct: (a: number, b: number) => [number, number, number];
    readonly scene_sampled_fraction: (a: number) => number;
    readonly scene_size: (a: number) => number;
    readonly scene_zero_filled: (a: number) => [number, number];
    readonly scene_zero_filled_psnr: (a: number) => [number, number, number];
    readonly settings_new: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
