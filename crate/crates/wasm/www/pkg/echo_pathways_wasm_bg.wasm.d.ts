/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demosimulation_free: (a: number, b: number) => void;
export const demosimulation_histogram: (a: number, b: number) => [number, number];
export const demosimulation_indices: (a: number) => [number, number];
export const demosimulation_intervene: (a: number, b: number, c: number) => [number, number];
export const demosimulation_landscape: (a: number) => [number, number, number, number];
export const demosimulation_new: (a: number, b: number) => [number, number, number];
export const demosimulation_opinions: (a: number) => [number, number];
export const demosimulation_step: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
