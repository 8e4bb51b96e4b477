import { defineConfig } from 'vitest/config';

export default defineConfig({
    test: {
        include: ['test/**/*.test.ts'],
        testTimeout: 120_000,
        hookTimeout: 300_000,
        // tfjs variables live per process; isolate suites to keep them apart
        pool: 'forks',
        fileParallelism: false,
    },
});
