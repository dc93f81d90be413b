import { StudioApp } from './app';
import { PipelineClient } from './client';

const baseUrl =
  import.meta.env.VITE_PIPELINE_URL ?? 'http://127.0.0.1:8341';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

new StudioApp(root, new PipelineClient(baseUrl));
