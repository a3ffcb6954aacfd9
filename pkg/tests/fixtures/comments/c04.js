var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var re = /\/\*.*?\*\//g; // regex with comment delimiters
// standalone comment 56
var m = s.replace(/\/\//g, '/'); // escaped slashes
var d = x++ / 2; /* after postfix */
// standalone comment 4
return_ = [1, 2].map(function (v) { return v / 2; /* half */ });
// standalone comment 11

var img = ee.Image('X')  /* block */ .select(['B4']) // after chain
var s = "/* not a comment */"; /* real one */

var d = x++ / 2; /* after postfix */
