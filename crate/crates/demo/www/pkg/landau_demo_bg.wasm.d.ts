/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_relaxation_free: (a: number, b: number) => void;
export const coefficientSlice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const exponentSet: (a: number, b: number) => [number, number, number, number];
export const levelCeilingCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const relaxation_advance: (a: number, b: number) => [number, number, number];
export const relaxation_history: (a: number) => [number, number];
export const relaxation_n: (a: number) => number;
export const relaxation_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const relaxation_perturbationSlice: (a: number) => [number, number];
export const relaxation_time: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
