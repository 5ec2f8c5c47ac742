import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { parseState } from "./urlstate.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const app = new App(root, new ApiClient(""));

window.addEventListener("popstate", () => {
  void app.navigate(parseState(window.location.search), { push: false });
});

void app.start(parseState(window.location.search));
