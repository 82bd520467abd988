/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_hardcoredemo_free: (a: number, b: number) => void;
export const __wbg_isingdemo_free: (a: number, b: number) => void;
export const hardcoredemo_cells: (a: number) => [number, number];
export const hardcoredemo_density: (a: number) => number;
export const hardcoredemo_lambda_limit: () => number;
export const hardcoredemo_last_iterations: (a: number) => bigint;
export const hardcoredemo_last_resample_set: (a: number) => number;
export const hardcoredemo_last_resamples: (a: number) => bigint;
export const hardcoredemo_new: (a: number, b: number, c: bigint) => [number, number, number];
export const hardcoredemo_side: (a: number) => number;
export const hardcoredemo_toggle: (a: number, b: number) => [number, number, number];
export const isingdemo_beta: (a: number) => number;
export const isingdemo_beta_limit: () => number;
export const isingdemo_last_iterations: (a: number) => bigint;
export const isingdemo_last_resample_set: (a: number) => number;
export const isingdemo_last_resamples: (a: number) => bigint;
export const isingdemo_magnetization: (a: number) => number;
export const isingdemo_new: (a: number, b: number, c: bigint) => [number, number, number];
export const isingdemo_set_beta: (a: number, b: number) => [number, number];
export const isingdemo_set_site_beta: (a: number, b: number, c: number) => [number, number];
export const isingdemo_side: (a: number) => number;
export const isingdemo_spins: (a: number) => [number, number];
export const scaling_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
