import { defineConfig } from 'vitest/config';

export default defineConfig({
    test: {
        environment: 'node',
        include: ['test/**/*.test.ts'],
        // the live round-trip test boots the python service; generous cap
        testTimeout: 30000,
    },
});
