import { startApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8000";

const root = document.getElementById("app");
if (root) void startApp(root, baseUrl);
