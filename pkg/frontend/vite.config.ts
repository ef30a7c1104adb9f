import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      "/login": "http://127.0.0.1:8000",
      "/guest": "http://127.0.0.1:8000",
      "/activities": "http://127.0.0.1:8000",
      "/theories": "http://127.0.0.1:8000",
      "/archive": "http://127.0.0.1:8000",
      "/lint": "http://127.0.0.1:8000",
      "/check": "http://127.0.0.1:8000",
      "/metrics": "http://127.0.0.1:8000",
      "/ws": { target: "ws://127.0.0.1:8000", ws: true },
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
