// @ts-check
'use strict';

const url = "http://example.com"; // trailing
const re = `line one
// inside template
line three`;
/* a */ const b = 2;

function g(a, b) {
  return a / b; // division not comment
}
