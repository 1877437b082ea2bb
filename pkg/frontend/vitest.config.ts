import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    // the live-server test owns the port and the lone CPU; run files one by one
    fileParallelism: false,
  },
});
