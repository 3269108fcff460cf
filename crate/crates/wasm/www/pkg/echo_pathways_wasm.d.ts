/* tslint:disable */
/* eslint-disable */

export class DemoSimulation {
    free(): void;
    [Symbol.dispose](): void;
    histogram(bins: number): Uint32Array;
    /**
     * JSON with `step`, `rho`, `i_h`, `i_p`, `i_s` and `finished`.
     */
    indices(): string;
    /**
     * JSON intervention, e.g. `{"kind": "set_strategy", "strategy": "opinion"}`.
     */
    intervene(json: string): void;
    /**
     * JSON landscape, or `null` before the first step.
     */
    landscape(): string;
    constructor(config_json: string);
    opinions(): Float64Array;
    step(n: number): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demosimulation_free: (a: number, b: number) => void;
    readonly demosimulation_histogram: (a: number, b: number) => [number, number];
    readonly demosimulation_indices: (a: number) => [number, number];
    readonly demosimulation_intervene: (a: number, b: number, c: number) => [number, number];
    readonly demosimulation_landscape: (a: number) => [number, number, number, number];
    readonly demosimulation_new: (a: number, b: number) => [number, number, number];
    readonly demosimulation_opinions: (a: number) => [number, number];
    readonly demosimulation_step: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
