import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
  },
  server: {
    // dev-time proxy to a locally running render service
    proxy: {
      "/volumes": "http://127.0.0.1:8000",
      "/render": "http://127.0.0.1:8000",
      "/healthz": "http://127.0.0.1:8000",
      "/session": { target: "ws://127.0.0.1:8000", ws: true },
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
