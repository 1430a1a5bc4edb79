/* tslint:disable */
/* eslint-disable */

/**
 * Truncation error and tail-sum bound for every cutoff up to the full sum.
 */
export function approx_sweep_json(len: number, a: number, b: number, s: number, seed: bigint): string;

/**
 * Median MSE and BER per equalizer at `(L, a, b) = (128, 16, 16)`.
 */
export function channel_json(tau0: number, nu0: number, snr_db: number, trials: number, seed: bigint): string;

/**
 * Largest side-diagonal entry per lattice-norm shell for a random symbol of smoothness `s`.
 */
export function decay_profile_json(len: number, a: number, b: number, s: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly approx_sweep_json: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly channel_json: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly decay_profile_json: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
