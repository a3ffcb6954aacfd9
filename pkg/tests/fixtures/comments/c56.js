var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var fc = ee.FeatureCollection('F') /* first */ /* second */ .limit(5);
var re = /\/\*.*?\*\//g; // regex with comment delimiters

var d = x++ / 2; /* after postfix */

var m = s.replace(/\/\//g, '/'); // escaped slashes
// standalone comment 17
