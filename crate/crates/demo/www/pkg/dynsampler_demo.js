/* @ts-self-types="./dynsampler_demo.d.ts" */

/**
 * Hardcore model on a torus. Clicking a site removes its four edges, or
 * restores them if it is already detached.
 */
export class HardcoreDemo {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        HardcoreDemoFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_hardcoredemo_free(ptr, 0);
    }
    /**
     * 0 empty, 1 occupied, plus 2 when the site is detached.
     * @returns {Uint8Array}
     */
    cells() {
        const ret = wasm.hardcoredemo_cells(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {number}
     */
    density() {
        const ret = wasm.hardcoredemo_density(this.__wbg_ptr);
        return ret;
    }
    /**
     * Fugacity threshold of the convergence guarantee for degree 4.
     * @returns {number}
     */
    static lambda_limit() {
        const ret = wasm.hardcoredemo_lambda_limit();
        return ret;
    }
    /**
     * @returns {bigint}
     */
    last_iterations() {
        const ret = wasm.hardcoredemo_last_iterations(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * @returns {number}
     */
    last_resample_set() {
        const ret = wasm.hardcoredemo_last_resample_set(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {bigint}
     */
    last_resamples() {
        const ret = wasm.hardcoredemo_last_resamples(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * @param {number} side
     * @param {number} lambda
     * @param {bigint} seed
     */
    constructor(side, lambda, seed) {
        const ret = wasm.hardcoredemo_new(side, lambda, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        HardcoreDemoFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @returns {number}
     */
    side() {
        const ret = wasm.hardcoredemo_side(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Detaches or re-attaches `site`; returns whether it is now detached.
     * @param {number} site
     * @returns {boolean}
     */
    toggle(site) {
        const ret = wasm.hardcoredemo_toggle(this.__wbg_ptr, site);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0] !== 0;
    }
}
if (Symbol.dispose) HardcoreDemo.prototype[Symbol.dispose] = HardcoreDemo.prototype.free;

/**
 * Ising model on a torus with uniform coupling.
 */
export class IsingDemo {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        IsingDemoFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_isingdemo_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    beta() {
        const ret = wasm.isingdemo_beta(this.__wbg_ptr);
        return ret;
    }
    /**
     * Largest `|β|` the convergence guarantee covers on this 4-regular graph.
     * @returns {number}
     */
    static beta_limit() {
        const ret = wasm.isingdemo_beta_limit();
        return ret;
    }
    /**
     * @returns {bigint}
     */
    last_iterations() {
        const ret = wasm.isingdemo_last_iterations(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * @returns {number}
     */
    last_resample_set() {
        const ret = wasm.isingdemo_last_resample_set(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {bigint}
     */
    last_resamples() {
        const ret = wasm.isingdemo_last_resamples(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * @returns {number}
     */
    magnetization() {
        const ret = wasm.isingdemo_magnetization(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {number} side
     * @param {number} beta
     * @param {bigint} seed
     */
    constructor(side, beta, seed) {
        const ret = wasm.isingdemo_new(side, beta, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        IsingDemoFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * Sets every coupling to `beta` and repairs the sample.
     * @param {number} beta
     */
    set_beta(beta) {
        const ret = wasm.isingdemo_set_beta(this.__wbg_ptr, beta);
        if (ret[1]) {
            throw takeFromExternrefTable0(ret[0]);
        }
    }
    /**
     * Sets the coupling of the edges around one site, as a small update.
     * @param {number} site
     * @param {number} beta
     */
    set_site_beta(site, beta) {
        const ret = wasm.isingdemo_set_site_beta(this.__wbg_ptr, site, beta);
        if (ret[1]) {
            throw takeFromExternrefTable0(ret[0]);
        }
    }
    /**
     * @returns {number}
     */
    side() {
        const ret = wasm.isingdemo_side(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Spins as 0/1, row-major.
     * @returns {Uint8Array}
     */
    spins() {
        const ret = wasm.isingdemo_spins(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
}
if (Symbol.dispose) IsingDemo.prototype[Symbol.dispose] = IsingDemo.prototype.free;

/**
 * Mean iterations and resamplings per update size on a soft chain of `n`
 * variables, for `k = 1, 2, 4, …, max_k`. Flattened as
 * `[k, mean_iterations, mean_resamples, stderr]` per row.
 * @param {number} n
 * @param {number} max_k
 * @param {number} trials
 * @param {bigint} seed
 * @returns {Float64Array}
 */
export function scaling_curve(n, max_k, trials, seed) {
    const ret = wasm.scaling_curve(n, max_k, trials, seed);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_generic_0000000000000001: function(arg0, arg1) {
            // Cast intrinsic for `Ref(String) -> Externref`.
            const ret = getStringFromWasm0(arg0, arg1);
            return ret;
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./dynsampler_demo_bg.js": import0,
    };
}

const HardcoreDemoFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_hardcoredemo_free(ptr, 1));
const IsingDemoFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_isingdemo_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU8FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint8ArrayMemory0().subarray(ptr / 1, ptr / 1 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('dynsampler_demo_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
