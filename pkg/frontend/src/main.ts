import "./style.css";
import { ApiClient } from "./api";
import { ProofBenchApp } from "./app";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
new ProofBenchApp(root, new ApiClient());
