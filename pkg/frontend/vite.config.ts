/// <reference types="vitest/config" />
import { defineConfig } from 'vite';

export default defineConfig({
  build: {
    target: 'es2022',
  },
  test: {
    environment: 'node',
    include: ['tests/**/*.test.ts'],
    // the contract suite boots the real pipeline service
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
