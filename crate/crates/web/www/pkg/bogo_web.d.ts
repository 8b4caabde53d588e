/* tslint:disable */
/* eslint-disable */

/**
 * Enumerates the Gibbs measure of a repulsive chain and reports site
 * occupation probabilities together with two identity residuals.
 */
export function exact_chain(sites: number, sigma: number, amplitude: number, cutoff: number, beta: number): string;

/**
 * Tunes beta so the chain has Mayer norm `mayer_norm`, then iterates
 * `L = 1 + J L` and compares with enumeration. Fails with the solver's own
 * message outside the contraction regime.
 */
export function fixed_point(sites: number, sigma: number, mayer_norm: number): string;

/**
 * Grand-canonical Monte Carlo on a ring of length 10 with a soft repulsion
 * of range 1. Returns the pair correlation next to the bare Boltzmann
 * factor, which it approaches as the activity goes to zero.
 */
export function sample_pair_correlation(z: number, amplitude: number, sweeps: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly exact_chain: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly fixed_point: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sample_pair_correlation: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
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
