var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var o = {a: 1, /* key */ b: 'x//y'}; // object
var fc = ee.FeatureCollection('F') /* first */ /* second */ .limit(5);

var r2 = /[/]+/.test('a//b');
var d = x++ / 2; /* after postfix */

var re = /\/\*.*?\*\//g; // regex with comment delimiters
var o = {a: 1, /* key */ b: 'x//y'}; // object
// standalone comment 8

var n = ee.Number(4) // comment between
  .sqrt();
var q = a / b / c; // divisions, not regexes
var m = s.replace(/\/\//g, '/'); // escaped slashes
var fc = ee.FeatureCollection('F') /* first */ /* second */ .limit(5);
