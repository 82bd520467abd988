/* tslint:disable */
/* eslint-disable */

/**
 * Hardcore model on a torus. Clicking a site removes its four edges, or
 * restores them if it is already detached.
 */
export class HardcoreDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * 0 empty, 1 occupied, plus 2 when the site is detached.
     */
    cells(): Uint8Array;
    density(): number;
    /**
     * Fugacity threshold of the convergence guarantee for degree 4.
     */
    static lambda_limit(): number;
    last_iterations(): bigint;
    last_resample_set(): number;
    last_resamples(): bigint;
    constructor(side: number, lambda: number, seed: bigint);
    side(): number;
    /**
     * Detaches or re-attaches `site`; returns whether it is now detached.
     */
    toggle(site: number): boolean;
}

/**
 * Ising model on a torus with uniform coupling.
 */
export class IsingDemo {
    free(): void;
    [Symbol.dispose](): void;
    beta(): number;
    /**
     * Largest `|β|` the convergence guarantee covers on this 4-regular graph.
     */
    static beta_limit(): number;
    last_iterations(): bigint;
    last_resample_set(): number;
    last_resamples(): bigint;
    magnetization(): number;
    constructor(side: number, beta: number, seed: bigint);
    /**
     * Sets every coupling to `beta` and repairs the sample.
     */
    set_beta(beta: number): void;
    /**
     * Sets the coupling of the edges around one site, as a small update.
     */
    set_site_beta(site: number, beta: number): void;
    side(): number;
    /**
     * Spins as 0/1, row-major.
     */
    spins(): Uint8Array;
}

/**
 * Mean iterations and resamplings per update size on a soft chain of `n`
 * variables, for `k = 1, 2, 4, …, max_k`. Flattened as
 * `[k, mean_iterations, mean_resamples, stderr]` per row.
 */
export function scaling_curve(n: number, max_k: number, trials: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_hardcoredemo_free: (a: number, b: number) => void;
    readonly __wbg_isingdemo_free: (a: number, b: number) => void;
    readonly hardcoredemo_cells: (a: number) => [number, number];
    readonly hardcoredemo_density: (a: number) => number;
    readonly hardcoredemo_lambda_limit: () => number;
    readonly hardcoredemo_last_iterations: (a: number) => bigint;
    readonly hardcoredemo_last_resample_set: (a: number) => number;
    readonly hardcoredemo_last_resamples: (a: number) => bigint;
    readonly hardcoredemo_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly hardcoredemo_side: (a: number) => number;
    readonly hardcoredemo_toggle: (a: number, b: number) => [number, number, number];
    readonly isingdemo_beta: (a: number) => number;
    readonly isingdemo_beta_limit: () => number;
    readonly isingdemo_last_iterations: (a: number) => bigint;
    readonly isingdemo_last_resample_set: (a: number) => number;
    readonly isingdemo_last_resamples: (a: number) => bigint;
    readonly isingdemo_magnetization: (a: number) => number;
    readonly isingdemo_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly isingdemo_set_beta: (a: number, b: number) => [number, number];
    readonly isingdemo_set_site_beta: (a: number, b: number, c: number) => [number, number];
    readonly isingdemo_side: (a: number) => number;
    readonly isingdemo_spins: (a: number) => [number, number];
    readonly scaling_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
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
