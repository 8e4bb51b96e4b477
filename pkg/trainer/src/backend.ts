/**
 * Backend selection: prefer the bundled WASM kernels (an order of magnitude
 * faster than the pure-JS CPU backend on this workload), fall back to 'cpu'
 * when WASM cannot initialize. Both are deterministic for seeded ops.
 */

import * as tf from '@tensorflow/tfjs';
import { setWasmPaths } from '@tensorflow/tfjs-backend-wasm';
import { createRequire } from 'module';
import { dirname, join } from 'path';

let initialized: Promise<string> | null = null;

export function initBackend(): Promise<string> {
    if (initialized === null) {
        initialized = (async () => {
            try {
                const require = createRequire(import.meta.url);
                const pkg = require.resolve('@tensorflow/tfjs-backend-wasm/package.json');
                setWasmPaths(join(dirname(pkg), 'dist') + '/');
                if (await tf.setBackend('wasm')) {
                    await tf.ready();
                    return tf.getBackend();
                }
            } catch (err) {
                console.error(`wasm backend unavailable (${err}); using cpu`);
            }
            await tf.setBackend('cpu');
            await tf.ready();
            return tf.getBackend();
        })();
    }
    return initialized;
}
