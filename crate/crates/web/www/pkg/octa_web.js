/* @ts-self-types="./octa_web.d.ts" */

export class Demo {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        DemoFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_demo_free(ptr, 0);
    }
    /**
     * The scan as RGBA bytes.
     * @returns {Uint8Array}
     */
    image_rgba() {
        const ret = wasm.demo_image_rgba(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @param {number} seed
     * @param {number} size
     * @param {boolean} healthy
     */
    constructor(seed, size, healthy) {
        const ret = wasm.demo_new(seed, size, healthy);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        DemoFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * Scan darkened, segmented vessel in green, filled holes in amber.
     * @returns {Uint8Array}
     */
    overlay_rgba() {
        const ret = wasm.demo_overlay_rgba(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * Runs the pipeline with the given settings, keeping the mask for
     * [`Demo::overlay_rgba`].
     * @param {number} sigma
     * @param {number} otsu_cap
     * @param {number} binary_threshold
     * @returns {Readout}
     */
    segment(sigma, otsu_cap, binary_threshold) {
        const ret = wasm.demo_segment(this.__wbg_ptr, sigma, otsu_cap, binary_threshold);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return Readout.__wrap(ret[0]);
    }
    /**
     * @returns {number}
     */
    size() {
        const ret = wasm.demo_size(this.__wbg_ptr);
        return ret >>> 0;
    }
}
if (Symbol.dispose) Demo.prototype[Symbol.dispose] = Demo.prototype.free;

/**
 * Biomarkers of the current mask and its agreement with the phantom truth.
 */
export class Readout {
    static __wrap(ptr) {
        const obj = Object.create(Readout.prototype);
        obj.__wbg_ptr = ptr;
        ReadoutFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ReadoutFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_readout_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get dice() {
        const ret = wasm.__wbg_get_readout_dice(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get filled_pixels() {
        const ret = wasm.__wbg_get_readout_filled_pixels(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get jaccard() {
        const ret = wasm.__wbg_get_readout_jaccard(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get mcnv_area_mm2() {
        const ret = wasm.__wbg_get_readout_mcnv_area_mm2(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get object_pixels() {
        const ret = wasm.__wbg_get_readout_object_pixels(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get total_area_mm2() {
        const ret = wasm.__wbg_get_readout_total_area_mm2(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get vessel_density() {
        const ret = wasm.__wbg_get_readout_vessel_density(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {number} arg0
     */
    set dice(arg0) {
        wasm.__wbg_set_readout_dice(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set filled_pixels(arg0) {
        wasm.__wbg_set_readout_filled_pixels(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set jaccard(arg0) {
        wasm.__wbg_set_readout_jaccard(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set mcnv_area_mm2(arg0) {
        wasm.__wbg_set_readout_mcnv_area_mm2(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set object_pixels(arg0) {
        wasm.__wbg_set_readout_object_pixels(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set total_area_mm2(arg0) {
        wasm.__wbg_set_readout_total_area_mm2(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set vessel_density(arg0) {
        wasm.__wbg_set_readout_vessel_density(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) Readout.prototype[Symbol.dispose] = Readout.prototype.free;

/**
 * Votes for one point of the area plane.
 */
export class Verdict {
    static __wrap(ptr) {
        const obj = Object.create(Verdict.prototype);
        obj.__wbg_ptr = ptr;
        VerdictFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        VerdictFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_verdict_free(ptr, 0);
    }
    /**
     * @returns {string}
     */
    dl() {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.verdict_dl(this.__wbg_ptr);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * @returns {string}
     */
    dt() {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.verdict_dt(this.__wbg_ptr);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * @returns {string}
     */
    dt_rule() {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.verdict_dt_rule(this.__wbg_ptr);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * @returns {string}
     */
    ensemble() {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.verdict_ensemble(this.__wbg_ptr);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * @returns {string}
     */
    svm() {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.verdict_svm(this.__wbg_ptr);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
}
if (Symbol.dispose) Verdict.prototype[Symbol.dispose] = Verdict.prototype.free;

/**
 * Classifies areas (mm²) with the decision-tree table, the SVM and DL rules
 * on bins learned from the rule-region data, and their ensemble.
 * @param {number} mcnv_area_mm2
 * @param {number} total_area_mm2
 * @returns {Verdict}
 */
export function classify_areas(mcnv_area_mm2, total_area_mm2) {
    const ret = wasm.classify_areas(mcnv_area_mm2, total_area_mm2);
    return Verdict.__wrap(ret);
}

/**
 * RGBA map of the decision-tree table over `[0, max_area]²`, mCNV area on
 * the x axis and total area upwards. Points with total < mCNV are grey.
 * @param {number} width
 * @param {number} height
 * @param {number} max_area
 * @returns {Uint8Array}
 */
export function rule_plane_rgba(width, height, max_area) {
    const ret = wasm.rule_plane_rgba(width, height, max_area);
    var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
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
        "./octa_web_bg.js": import0,
    };
}

const DemoFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_demo_free(ptr, 1));
const ReadoutFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_readout_free(ptr, 1));
const VerdictFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_verdict_free(ptr, 1));

function getArrayU8FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint8ArrayMemory0().subarray(ptr / 1, ptr / 1 + len);
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
        module_or_path = new URL('octa_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
