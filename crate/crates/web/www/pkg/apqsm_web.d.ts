/* tslint:disable */
/* eslint-disable */

/**
 * Union bounds over an SNR grid for the split `p` and for the default split.
 */
export function bounds(eta: number, p: Float64Array, d_tx: number, semi_angle_deg: number, snr_lo: number, snr_hi: number, snr_step: number): string;

/**
 * 4x4 channel matrix of the reference room plus pairwise column
 * similarities, as `{"h": [[..]], "similarity": [[..]]}`.
 */
export function channel(d_tx: number, semi_angle_deg: number): string;

/**
 * Runs the trust-region optimizer from the default split and returns the
 * full iteration trace.
 */
export function optimize(eta: number, d_tx: number, semi_angle_deg: number, snr_db: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bounds: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly channel: (a: number, b: number) => [number, number, number, number];
    readonly optimize: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
