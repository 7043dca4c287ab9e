import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: "./tests/global-setup.ts",
    testTimeout: 60_000,
    hookTimeout: 120_000,
    // all test files share one live service instance
    fileParallelism: false,
  },
});
