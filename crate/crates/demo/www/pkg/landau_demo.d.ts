/* tslint:disable */
/* eslint-disable */

/**
 * A relaxation run that the page advances a few steps per frame.
 */
export class Relaxation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Takes `steps` stable steps; returns the new time.
     */
    advance(steps: number): number;
    /**
     * Rows of `(t, ‖h‖_∞, ‖h‖₂, ∫f log f)`, flattened.
     */
    history(): Float64Array;
    n(): number;
    /**
     * `kind` is one of `maxwellian`, `anisotropic`, `two_bump`, `perturbed`.
     */
    constructor(n: number, extent: number, kind: string, strength: number);
    /**
     * `h = f − μ` on the plane `v₃ = 0`, row-major `n × n`.
     */
    perturbationSlice(): Float64Array;
    time(): number;
}

/**
 * Mid-plane slice of a coefficient of the chosen datum: `component` is
 * `a`, `A11`, `A12`, `A33` or `grad_a1`.
 */
export function coefficientSlice(n: number, extent: number, kind: string, strength: number, component: string): Float64Array;

/**
 * `[γ, β₀, β₁, β₂, α, q, m_threshold]` for `(p, m)`.
 */
export function exponentSet(p: number, m: number): Float64Array;

/**
 * `K(t)` at `points` log-spaced times in `[10⁻³T, T]`, flattened as `t, K`
 * pairs.
 */
export function levelCeilingCurve(p: number, m: number, e0: number, big_t: number, c: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_relaxation_free: (a: number, b: number) => void;
    readonly coefficientSlice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly exponentSet: (a: number, b: number) => [number, number, number, number];
    readonly levelCeilingCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly relaxation_advance: (a: number, b: number) => [number, number, number];
    readonly relaxation_history: (a: number) => [number, number];
    readonly relaxation_n: (a: number) => number;
    readonly relaxation_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly relaxation_perturbationSlice: (a: number) => [number, number];
    readonly relaxation_time: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
